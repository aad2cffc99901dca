use fermicav::backends::{
    compile_trotter_grouped, BackendKind, CompileOptions, TrotterSpec,
};
use fermicav::encoding::EncodingKind;
use fermicav::models::{build_hubbard, HubbardSpec};

fn fit(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn main() {
    for hybrid in [2usize, 0] {
        println!("== hybrid_cutoff {hybrid} ==");
        for backend in [
            BackendKind::Local,
            BackendKind::CavitySeries,
            BackendKind::CavityParallel,
        ] {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut depths = Vec::new();
            let mut pulses = Vec::new();
            for n in 2..=8usize {
                let model = build_hubbard(&HubbardSpec {
                    nx: n,
                    ny: n,
                    kappa: 1.0,
                    u: 4.0,
                })
                .unwrap();
                let enc = model.encoding(EncodingKind::Jw);
                let h = model.encode_full(&enc).unwrap();
                let groups = model.wave_groups(&enc, &h).unwrap();
                let spec = TrotterSpec::new(0.1, 1);
                let mut opts = CompileOptions::new(backend);
                opts.hybrid_cutoff = hybrid;
                let comp = compile_trotter_grouped(&h, &spec, &opts, &groups).unwrap();
                let d = comp.circuit.depth();
                xs.push((n as f64).ln());
                ys.push((d as f64).ln());
                depths.push(d);
                if backend == BackendKind::CavitySeries {
                    let m = comp
                        .circuit
                        .metrics(&fermicav::circuit::DeviceModel::default());
                    pulses.push((m.collective_pulses, comp.cavity_terms_per_step));
                }
            }
            println!("{backend:?}: slope {:.3} depths {depths:?}", fit(&xs, &ys));
            if !pulses.is_empty() {
                println!("  series pulses/(cavity terms): {pulses:?}");
            }
        }
    }
}
