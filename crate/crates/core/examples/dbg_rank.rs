// scratch debug
use spectra_core::ordinals::OrdinalNotation;
use spectra_core::pairs::SuiteCtx;
use spectra_core::trees::*;

fn main() {
    let mut ctx = SuiteCtx::over_empty(6000);
    ctx.certify_level(2, 16).unwrap();
    let looper = spectra_core::machines::looper_index();
    let beta = OrdinalNotation::parse("w").unwrap();

    let t = coded_tree(&beta, 2, looper).unwrap();
    println!("verdict: {:?}", rank_verdict(&t, &ctx));
    for probe in [3usize, 5] {
        let p = ExpandParams {
            depth: probe + 2,
            width: probe + 2,
            node_budget: 120_000,
            ..ExpandParams::default()
        };
        let e = expand_term(&t, &ctx, &p).unwrap();
        println!("probe {probe}: nodes={} rank={} complete={}", e.tree.len(), e.tree.rank(), e.complete);
    }

    let t2 = coded_tree(&OrdinalNotation::parse("w + 1").unwrap(), 2, 0).unwrap();
    println!("t2 verdict: {:?}", rank_verdict(&t2, &ctx));
    let p = ExpandParams { depth: 6, width: 6, node_budget: 60_000, ..ExpandParams::default() };
    let e = expand_term(&t2, &ctx, &p).unwrap();
    println!("t2 expansion: nodes={} rank={} complete={}", e.tree.len(), e.tree.rank(), e.complete);
}
