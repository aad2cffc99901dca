use fermicav::backends::{compile_trotter, BackendKind, CompileOptions, TrotterSpec};
use fermicav::models::{build_hubbard, HubbardSpec};

fn main() {
    for n in [5usize, 6] {
        let spec = HubbardSpec { nx: n, ny: n, kappa: 0.1, u: 1.0 };
        let model = build_hubbard(&spec).unwrap();
        let enc = model.encoding(fermicav::encoding::EncodingKind::Jw);
        let h = model.encode_full(&enc).unwrap();
        let opts = CompileOptions::new(BackendKind::CavityParallel);
        let comp = compile_trotter(&h, &TrotterSpec::new(0.05, 1), &opts).unwrap();
        println!("N={n} depth={} groups={}", comp.circuit.layers().len(), comp.groups.len());
        for (gi, g) in comp.groups.iter().enumerate() {
            let mut loc = 0;
            let mut cav = 0;
            let mut w_min = usize::MAX;
            let mut w_max = 0;
            for &t in &g.terms {
                let w = &h.terms()[t].word;
                if w.weight() <= opts.hybrid_cutoff {
                    loc += 1;
                } else {
                    cav += 1;
                }
                let sup = w.support();
                if !sup.is_empty() {
                    w_min = w_min.min(sup[0]);
                    w_max = w_max.max(*sup.last().unwrap());
                }
            }
            println!("  group {gi}: local={loc} cavity={cav} wires [{w_min},{w_max}]");
        }
        for (li, layer) in comp.circuit.layers().iter().enumerate() {
            let mut kinds: Vec<String> = layer
                .iter()
                .map(|g| {
                    let name = format!("{g:?}");
                    name.split_whitespace().next().unwrap_or("?").split('(').next().unwrap().to_string()
                })
                .collect();
            kinds.sort();
            kinds.dedup();
            println!("  layer {li:3}: n={} kinds={}", layer.len(), kinds.join(","));
        }
    }
}
