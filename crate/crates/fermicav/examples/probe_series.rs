use fermicav::backends::{compile_trotter, BackendKind, CompileOptions, TrotterSpec};
use fermicav::models::{build_hubbard, HubbardSpec};

fn main() {
    for n in [3usize, 4, 5, 6] {
        let spec = HubbardSpec { nx: n, ny: n, kappa: 0.1, u: 1.0 };
        let model = build_hubbard(&spec).unwrap();
        let enc = model.encoding(fermicav::encoding::EncodingKind::Jw);
        let h = model.encode_full(&enc).unwrap();
        let opts = CompileOptions::new(BackendKind::CavitySeries);
        let comp = compile_trotter(&h, &TrotterSpec::new(0.05, 1), &opts).unwrap();
        let total = comp.registers.total_wires();
        let n_data = comp.registers.n_data;
        let layers = comp.circuit.layers();
        let mut occ = vec![0usize; total];
        for layer in layers {
            let mut touched = vec![false; total];
            for g in layer {
                for w in g.wires(&comp.registers) {
                    touched[w] = true;
                }
            }
            for w in 0..total {
                if touched[w] {
                    occ[w] += 1;
                }
            }
        }
        let max_data = occ[..n_data].iter().max().unwrap();
        let max_anc = occ[n_data..].iter().max().unwrap_or(&0);
        let anc_occ: Vec<usize> = occ[n_data..].to_vec();
        println!(
            "N={n}: depth={} wires={} (data {n_data}, anc {}) max data occ={} max anc occ={}",
            layers.len(),
            total,
            total - n_data,
            max_data,
            max_anc
        );
        println!("  anc occupancy: {anc_occ:?}");
        // busiest data wires
        let mut idx: Vec<usize> = (0..n_data).collect();
        idx.sort_by_key(|&w| std::cmp::Reverse(occ[w]));
        let top: Vec<(usize, usize)> = idx.iter().take(6).map(|&w| (w, occ[w])).collect();
        println!("  top data wires: {top:?}");
    }
}
