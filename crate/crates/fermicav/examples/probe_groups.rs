use fermicav::encoding::EncodingKind;
use fermicav::models::{build_hubbard, HubbardSpec};
use fermicav::scheduler::{partition_commuting, PartitionStrategy};

fn main() {
    for n in [2usize, 3, 4, 7, 8] {
        let spec = HubbardSpec { nx: n, ny: n, kappa: 0.1, u: 1.0 };
        let model = build_hubbard(&spec).unwrap();
        let enc = model.encoding(EncodingKind::Jw);
        let h = model.encode_full(&enc).unwrap();
        let groups =
            partition_commuting(&h, PartitionStrategy::GreedyLargestDegreeFirst).unwrap();
        println!("N={n}: {} terms, {} groups", h.len(), groups.len());
        for (gi, g) in groups.iter().enumerate() {
            let mut kinds = std::collections::BTreeMap::new();
            for &ti in &g.terms {
                let t = &h.terms()[ti];
                let sup = t.word.support();
                let span = if sup.is_empty() { 0 } else { sup[sup.len() - 1] - sup[0] + 1 };
                let label = match (t.word.weight(), span) {
                    (0, _) => "id",
                    (1, _) => "z1",
                    (2, 2) => "adj2",
                    (2, _) => "far2",
                    (w, s) if w == s => "dense-string",
                    _ => "sparse-string",
                };
                *kinds.entry(label).or_insert(0usize) += 1;
            }
            println!("  group {gi}: {} terms {:?}", g.terms.len(), kinds);
        }
    }
}
