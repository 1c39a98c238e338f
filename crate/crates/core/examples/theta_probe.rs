use spinlab_core::lovasz::{build_anticommutativity_graph, Graph};

fn main() {
    for (name, g, target) in [
        ("empty8", Graph::empty(8), 8.0),
        ("complete8", Graph::complete(8), 1.0),
        ("C5", Graph::cycle(5), 5.0f64.sqrt()),
    ] {
        probe(name, &g, target);
    }
    let pg = build_anticommutativity_graph(3).unwrap();
    probe("G3", &pg.graph, 3.0);
    probe("G3bar", &pg.graph.complement(), 9.0);
    let pg4 = build_anticommutativity_graph(4).unwrap();
    probe("G4", &pg4.graph, 6.0);
    probe("G4bar", &pg4.graph.complement(), 9.0);
}

fn probe(name: &str, g: &Graph, target: f64) {
    let t0 = std::time::Instant::now();
    match spinlab_core::lovasz::lovasz_theta(g, 1e9) {
        Ok(th) => println!(
            "{name}: lower={:.6} upper={:.6} gap={:.3e} target={:.6}  ({:.2?})",
            th.lower,
            th.upper,
            th.residuals.gap,
            target,
            t0.elapsed()
        ),
        Err(e) => println!("{name}: ERR {e}"),
    }
}
