//! Local solubility verdicts for a handful of quartics z^2 = Q(r, s).

use ecdescent::arith::Factorizer;
use ecdescent::forms::QuarticForm;
use ecdescent::solubility::is_everywhere_locally_soluble;

fn main() {
    let factorizer = Factorizer::default();
    let quartics = [
        [93, -10336, -47154, -51680, 2325],
        [74892, -154840, 123789, -45916, 6725],
        [-1, 0, 0, 0, -1],
        [3, 0, 0, 0, 3],
        [5, 0, 0, 0, 5],
        // Locally soluble everywhere, yet without a rational point.
        [2, 0, 0, 0, -34],
    ];
    for c in quartics {
        let q = QuarticForm::from_i64(c);
        let v = is_everywhere_locally_soluble(&q, &factorizer);
        let why = v.obstruction.as_ref().map(|p| format!(" at {p}")).unwrap_or_default();
        println!("{q}: {}{why}", v.label());
    }
}
