//! Pathloss calibration and a random user drop.
//!
//! Run with `cargo run --example calibrate`.

use groupcast::model::{drop_for, linear_to_db};
use groupcast::{calibrate_pathloss_constant, Result, SystemConfig};

fn main() -> Result<()> {
    let config = SystemConfig::uniform(8, 4, 3, 7);
    let xi = calibrate_pathloss_constant(&config)?;
    println!("pathloss constant {xi:.6} ({:.2} dB)", linear_to_db(xi));

    let drop = drop_for(&config, 0)?;
    for (i, (distances, variances)) in drop.distances.iter().zip(drop.variances()?).enumerate() {
        let pairs: Vec<String> = distances
            .iter()
            .zip(&variances)
            .map(|(d, b)| format!("{d:.3} km -> {:.2} dB", linear_to_db(*b)))
            .collect();
        println!("group {i}: {}", pairs.join(", "));
    }
    Ok(())
}
