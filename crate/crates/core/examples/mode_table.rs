//! The eight binary map layouts at a chosen `p`, with each mode's twins.
//!
//! `cargo run --example mode_table -- 0.3`

use chaotic_ac::maps::{bcac_params, twin_mode, MapMode};
use num_rational::BigRational;

fn main() -> chaotic_ac::Result<()> {
    let p: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.3);
    let p = BigRational::from_float(p).expect("finite p");
    let p = BigRational::new(
        (p * BigRational::from_integer(10_000.into())).round().to_integer(),
        10_000.into(),
    );
    println!("p = {p}\n");
    println!("mode  '0' interval        '1' interval        decode '0'           decode '1'           twins 0/1");
    for mode in MapMode::ALL {
        let m = bcac_params(mode, &p)?;
        let iv = |(lo, hi): &(BigRational, BigRational)| format!("[{lo}, {hi})");
        let af = |a: &chaotic_ac::maps::Affine| format!("{}y + {}", a.slope, a.offset);
        println!(
            "{:>4}  {:<18}  {:<18}  {:<19}  {:<19}  {}/{}",
            mode.digit(),
            iv(&m.zero_interval),
            iv(&m.one_interval),
            af(&m.decode_zero),
            af(&m.decode_one),
            twin_mode(mode, false).digit(),
            twin_mode(mode, true).digit(),
        );
    }
    Ok(())
}
