//! How many piecewise-linear maps an alphabet admits, and one of them in action.
//!
//! Run with `cargo run --example keyspace`.

use chaotic_ac::maps::{build_nary_map, key_bits, keyspace_size, map_forward, NaryMapSpec, Orientation, SymbolModel};
use num_rational::BigRational;

fn main() -> chaotic_ac::Result<()> {
    println!("{:>4}  {:>40}  {:>6}", "N", "maps (N! * 2^N)", "bits");
    for n in [2usize, 3, 4, 8, 16, 64, 256] {
        println!("{n:>4}  {:>40}  {:>6}", keyspace_size(n)?.to_string(), key_bits(n)?);
    }

    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let model = SymbolModel::new(vec![r(1, 10), r(2, 10), r(3, 10), r(4, 10)])?;
    use Orientation::*;
    let spec = NaryMapSpec::new(model, vec![2, 0, 3, 1], vec![Negative, Positive, Negative, Positive])?;
    let pieces = build_nary_map(&spec)?;
    println!("\narrangement [2,0,3,1] with orientations (-,+,-,+):");
    for piece in &pieces {
        println!("  symbol {} on [{}, {}) slope {:?}", piece.symbol, piece.beg, piece.end, piece.orientation);
    }

    let mut x = r(11, 20);
    print!("\norbit of {x}:");
    for _ in 0..6 {
        let (symbol, next) = map_forward(&pieces, &x)?;
        print!(" {symbol}");
        x = next;
    }
    println!();
    Ok(())
}
