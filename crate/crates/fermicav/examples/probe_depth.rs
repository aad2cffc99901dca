use fermicav::backends::{compile_trotter, BackendKind, CompileOptions, TrotterSpec};
use fermicav::encoding::EncodingKind;
use fermicav::models::{build_hubbard, HubbardSpec};

fn main() {
    for n in [4usize, 5] {
        let spec = HubbardSpec { nx: n, ny: n, kappa: 0.1, u: 1.0 };
        let model = build_hubbard(&spec).unwrap();
        let enc = model.encoding(EncodingKind::Jw);
        let h = model.encode_full(&enc).unwrap();
        let opts = CompileOptions::new(BackendKind::Local);
        let comp = compile_trotter(&h, &TrotterSpec::new(0.05, 1), &opts).unwrap();
        let layers = comp.circuit.layers();
        println!("N={n}: depth {}", layers.len());
        // layer occupancy histogram: how many wires busy per layer
        let mut thin = 0usize;
        for l in layers {
            let busy: usize = l.len();
            if busy <= 2 {
                thin += 1;
            }
        }
        println!("  layers with <=2 gates: {thin} / {}", layers.len());
        // busiest qubit: how many layers touch each wire
        let nw = comp.registers.total_wires();
        let mut per_wire = vec![0usize; nw];
        for l in layers {
            for g in l {
                let mut ws = Vec::new();
                let cloned = g.clone().map_wires(&mut |w| {
                    ws.push(w);
                    w
                });
                let _ = cloned;
                for w in ws {
                    per_wire[w] += 1;
                }
            }
        }
        let max_wire = per_wire.iter().copied().max().unwrap_or(0);
        let arg = per_wire.iter().position(|&x| x == max_wire).unwrap_or(0);
        println!("  busiest wire {arg}: {max_wire} layers of {}", layers.len());
    }
}
