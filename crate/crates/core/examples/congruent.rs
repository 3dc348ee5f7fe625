//! Search y^2 = x^3 - N^2 x by 8-descent. `cargo run --release --example congruent -- 157`

use ecdescent::cli::family_congruent;
use ecdescent::descent::eight_descent;
use ecdescent::point::{format_rational, TorsionList};
use ecdescent::search::SearchBounds;

fn main() -> ecdescent::Result<()> {
    let n: i64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(157);
    let curve = family_congruent(&n.into())?;
    match eight_descent(&curve, SearchBounds::default(), &TorsionList::default())? {
        Some((p, trace)) => {
            println!("{curve}");
            println!("x = {}", format_rational(p.x()));
            println!("y = {}", format_rational(p.y()));
            println!("d = {}, {} quartic scans", trace.d, trace.stats.quartic_scans);
            let x = p.x();
            // The triangle with area N: sides |x^2 - N^2| / y, 2 N x / y, (x^2 + N^2) / y.
            let nn = num_rational::BigRational::from_integer((n * n).into());
            let two_n = num_rational::BigRational::from_integer((2 * n).into());
            let y = p.y();
            let sides = [(x * x - &nn) / y, &two_n * x / y, (x * x + &nn) / y];
            for s in sides {
                println!("side {}", format_rational(&num_traits::Signed::abs(&s)));
            }
        }
        None => println!("{curve}: nothing found within the default bounds"),
    }
    Ok(())
}
