//! The n = 79 triangle curve, searched on its 2-isogenous model with d = 5,
//! printed stage by stage.

use ecdescent::arith::Factorizer;
use ecdescent::cli::family_triangle;
use ecdescent::descent::{variants_for, Descent, DescentOptions, Mode};
use ecdescent::forms::{descent_pair, resultant_k1};
use ecdescent::point::{format_rational, TorsionList};
use ecdescent::search::{Engine, SearchBounds};

fn main() -> ecdescent::Result<()> {
    let (primary, iso) = family_triangle(&79.into())?;
    println!("curve      {primary}");
    println!("isogenous  {iso}");

    let opts = DescentOptions {
        bounds: SearchBounds::new(2, 200, 99, 99, 400)?,
        mode: Mode::Eight,
        forced_d: Some(5.into()),
        max_units: None,
    };
    let engine = Engine::serial();
    let factorizer = Factorizer::default();
    let variants = variants_for(&primary, true, false);
    let out = Descent::new(&primary, variants, &TorsionList::default(), &opts, &engine, &factorizer)?.run(None, &mut |_| {})?;
    let (Some(t), Some(p)) = (out.trace, out.point) else {
        println!("no point: {:?}", out.status);
        return Ok(());
    };

    let c = &t.conic_solution;
    println!("d          {}", t.d);
    println!("conic      (h, f, g) = ({}, {}, {})", c.root, c.f, c.g);
    let (first, second) = descent_pair(&t.curve, &t.d, c)?;
    println!("quadratics {first} / {second}");
    println!("quartic    {}", t.quartic4_reduced);
    if let (Some(fac), Some(s)) = (&t.factorization, &t.second_solution) {
        println!("factors    {fac}");
        println!("resultant  {}", resultant_k1(fac)?);
        println!("k1 t^2 = v(r, s): (k1, t, r, s) = ({}, {}, {}, {})", s.k, s.root, s.f, s.g);
    }
    if let (Some(q8), Some(m)) = (&t.quartic8_reduced, &t.quartic8_scale) {
        println!("quartic8   {m}^2 * {q8}");
    }
    if let Some(h) = &t.hit {
        println!("hit        (i, j) = ({}, {}), z = {}", h.i, h.j, h.z);
    }
    if let Some(ip) = &t.point {
        println!("x (isog.)  {}", format_rational(ip.x()));
    }
    println!("x          {}", format_rational(p.x()));
    println!("height     {:.2}", p.naive_height());
    Ok(())
}
