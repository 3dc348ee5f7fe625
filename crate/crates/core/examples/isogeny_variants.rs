//! Every model searched for a curve with full 2-torsion, and the point each
//! one finds, mapped back to the original curve.

use ecdescent::arith::Factorizer;
use ecdescent::cli::family_congruent;
use ecdescent::descent::{Descent, DescentOptions};
use ecdescent::point::{format_rational, TorsionList};
use ecdescent::search::{Engine, SearchBounds};

fn main() -> ecdescent::Result<()> {
    let target = family_congruent(&157.into())?;
    let opts = DescentOptions {
        bounds: SearchBounds::default(),
        ..Default::default()
    };
    let engine = Engine::serial();
    let factorizer = Factorizer::default();
    let variants = [false, true].into_iter().flat_map(|iso| ecdescent::descent::variants_for(&target, iso, true));
    for v in variants {
        print!("{} (shift {}, via isogeny {}): ", v.curve, v.shift, v.via_isogeny);
        let d = Descent::new(&target, vec![v.clone()], &TorsionList::default(), &opts, &engine, &factorizer)?;
        let out = d.run(None, &mut |_| {})?;
        match out.point {
            Some(p) => println!("x = {}", format_rational(p.x())),
            None => println!("{:?}", out.status),
        }
    }
    Ok(())
}
