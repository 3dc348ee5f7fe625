//! 4-descent on a few small congruent-number curves.

use ecdescent::cli::family_congruent;
use ecdescent::descent::four_descent;
use ecdescent::point::{format_rational, TorsionList};
use ecdescent::search::SearchBounds;

fn main() -> ecdescent::Result<()> {
    let bounds = SearchBounds::new(2, 60, 40, 60, 60)?;
    for n in [5, 6, 7, 13, 14, 15, 21, 22, 23, 29, 30, 31] {
        let curve = family_congruent(&n.into())?;
        match four_descent(&curve, bounds, &TorsionList::default())? {
            Some((p, t)) => println!("N = {n:>3}  d = {:>3}  x = {}", t.d, format_rational(p.x())),
            None => println!("N = {n:>3}  none"),
        }
    }
    Ok(())
}
