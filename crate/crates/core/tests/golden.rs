use kumsim::kum::KumRecognizer;
use kumsim::lang::{gen_positive, member};
use kumsim::runtime::{max_gap, run};
use kumsim::smm::SmmRecognizer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GEN_GOLDEN: &str = include_str!("data/gen_positive_n2_seed7.txt");
const GAP_GOLDEN: &str = include_str!("data/realtime_golden.json");

#[test]
fn seeded_generator_matches_golden() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let line = gen_positive(2, &mut rng).unwrap().encode();
    assert_eq!(format!("{line}\n"), GEN_GOLDEN);
    assert!(member(line.as_bytes()));
}

fn pinned(key: &str) -> u64 {
    let v: serde_json::Value = serde_json::from_str(GAP_GOLDEN).unwrap();
    v[key].as_u64().unwrap()
}

#[test]
fn max_gaps_do_not_exceed_pinned_constants() {
    let (g_kum, g_smm) = (pinned("g_kum"), pinned("g_smm"));
    assert!(g_smm <= g_kum);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [4u32, 6] {
        for _ in 0..5 {
            let text = gen_positive(n, &mut rng).unwrap().encode();
            assert_eq!(max_gap(&run(&KumRecognizer, text.as_bytes()).unwrap().trace).unwrap(), g_kum);
            assert_eq!(max_gap(&run(&SmmRecognizer, text.as_bytes()).unwrap().trace).unwrap(), g_smm);
        }
    }
}
