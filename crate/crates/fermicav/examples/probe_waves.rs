use fermicav::backends::{compile_trotter, BackendKind, CompileOptions, TrotterSpec};
use fermicav::models::{build_hubbard, HubbardSpec, TermClass};
use fermicav::pauli::PauliSum;

fn main() {
    for n in [4usize, 5] {
        let spec = HubbardSpec { nx: n, ny: n, kappa: 0.1, u: 1.0 };
        let model = build_hubbard(&spec).unwrap();
        let enc = model.encoding(fermicav::encoding::EncodingKind::Jw);
        for (label, class) in [("v-even", TermClass::VerticalEven), ("v-odd", TermClass::VerticalOdd)] {
            let mut acc = PauliSum::zero(2 * n * n);
            for (i, t) in model.terms.iter().enumerate() {
                if t.class == class {
                    let s = model.encode_term(i, &enc).unwrap();
                    acc = acc.add(&s);
                }
            }
            acc.simplify();
            if acc.len() == 0 {
                continue;
            }
            for backend in [BackendKind::Local, BackendKind::CavitySeries] {
                let opts = CompileOptions::new(backend);
                let comp = compile_trotter(&acc, &TrotterSpec::new(0.05, 1), &opts).unwrap();
                println!(
                    "N={n} {label} {:?}: terms={} depth={}",
                    backend,
                    acc.len(),
                    comp.circuit.layers().len()
                );
            }
        }
        // one row pair alone for reference
        let mut one = PauliSum::zero(2 * n * n);
        for (i, t) in model.terms.iter().enumerate() {
            if t.class == TermClass::VerticalEven {
                if let fermicav::models::HubbardTermKind::Hop { from_mode, .. } = t.kind {
                    if from_mode < 2 * n {
                        let s = model.encode_term(i, &enc).unwrap();
                        one = one.add(&s);
                    }
                }
            }
        }
        one.simplify();
        for backend in [BackendKind::Local, BackendKind::CavitySeries] {
            let opts = CompileOptions::new(backend);
            let comp = compile_trotter(&one, &TrotterSpec::new(0.05, 1), &opts).unwrap();
            println!(
                "N={n} rp0-only {:?}: terms={} depth={}",
                backend,
                one.len(),
                comp.circuit.layers().len()
            );
        }
    }
}
