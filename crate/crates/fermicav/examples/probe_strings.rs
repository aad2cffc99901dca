use fermicav::encoding::EncodingKind;
use fermicav::models::{build_hubbard, HubbardSpec};

fn main() {
    let n = 5usize;
    let spec = HubbardSpec { nx: n, ny: n, kappa: 0.1, u: 1.0 };
    let model = build_hubbard(&spec).unwrap();
    let enc = model.encoding(EncodingKind::Jw);
    let h = model.encode_full(&enc).unwrap();
    let mut spans: Vec<(usize, usize, usize, String)> = Vec::new();
    for t in h.terms() {
        let sup = t.word.support();
        if sup.is_empty() {
            continue;
        }
        let span = sup[sup.len() - 1] - sup[0] + 1;
        if t.word.weight() > 2 {
            spans.push((sup[0], sup[sup.len() - 1], span, format!("{}", t.word)));
        }
    }
    spans.sort();
    println!("{} string terms", spans.len());
    for (a, b, s, w) in spans.iter().take(12) {
        println!("  [{a},{b}] span {s}  {}", &w[*a..=*b]);
    }
    let max_span = spans.iter().map(|x| x.2).max().unwrap();
    println!("max span {max_span} on {} wires", h.n_qubits());
}
