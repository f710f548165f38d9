use cplanar::dp::{test_cplanarity, validate_witness, DecompositionChoice, TestOptions};
use cplanar::gen::{generate_instances, glued_blocks, with_cutvertices, GenParams};
use cplanar::oracle::{oracle_cplanar, OracleLimits};
use proptest::prelude::*;

fn opts(decomposition: DecompositionChoice) -> TestOptions {
    TestOptions {
        decomposition,
        witness: true,
        ..TestOptions::default()
    }
}

fn agrees(cg: &cplanar::cgraph::ClusteredGraph, choice: DecompositionChoice) -> Result<(), TestCaseError> {
    let v = test_cplanarity(cg, &opts(choice)).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let o = oracle_cplanar(cg, &OracleLimits::default()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(v.c_planar, o.is_c_planar());
    if let Some(w) = &v.witness {
        prop_assert!(validate_witness(cg, w).is_ok());
    }
    prop_assert_eq!(v.witness.is_some(), v.c_planar);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_matches_oracle(seed in 0u64..100_000, flat in any::<bool>(), biconnected in any::<bool>()) {
        let p = GenParams { flat, biconnected, ..GenParams::default() };
        agrees(&generate_instances(&p, 1, seed)[0], DecompositionChoice::Auto)?;
    }

    #[test]
    fn heuristic_decomposition_gives_same_answer(seed in 0u64..100_000) {
        let p = GenParams { flat: seed % 2 == 0, ..GenParams::default() };
        agrees(&generate_instances(&p, 1, seed)[0], DecompositionChoice::Heuristic)?;
    }

    #[test]
    fn cutvertex_instances_match_oracle(seed in 0u64..100_000) {
        agrees(&with_cutvertices(1, seed)[0], DecompositionChoice::Auto)?;
        agrees(&glued_blocks(1, seed)[0], DecompositionChoice::Auto)?;
    }
}
