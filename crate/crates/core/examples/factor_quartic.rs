//! Factor a quartic into two quadratics and list the k1 candidates.

use ecdescent::arith::Factorizer;
use ecdescent::forms::{factor_quartic, resultant_k1, QuarticForm};

fn main() -> ecdescent::Result<()> {
    let factorizer = Factorizer::default();
    let q = QuarticForm::from_i64([93, -10336, -47154, -51680, 2325]);
    println!("{q}");
    for fac in factor_quartic(&q, &factorizer) {
        let res = resultant_k1(&fac)?;
        let ks = factorizer.squarefree_divisors(&res)?;
        println!("  = {fac}");
        println!("    resultant {res}");
        println!("    k1 in {{{}}}", ks.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(", "));
    }
    Ok(())
}
