mod common;

use common::cut_corpus::*;
use common::prolog::reference;
use common::spec;
use optab::engine::{EngineError, Scheduling};

fn dedup_sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v.dedup();
    v
}

#[test]
fn corpus_matches_reference() {
    let cases = corpus();
    assert_eq!(cases.len(), 20);
    for c in &cases {
        let want = reference(c.program, c.query).unwrap();
        assert!(!want.is_empty(), "{}: reference found nothing", c.name);
        for sched in [Scheduling::Batched, Scheduling::Local] {
            let s = spec(c.program, c.query, sched);
            let got = s.run(0).unwrap_or_else(|e| panic!("{} {sched}: {e}", c.name)).result.lines();
            if c.tabled {
                assert_eq!(dedup_sorted(got), dedup_sorted(want.clone()), "{} {sched}", c.name);
            } else {
                assert_eq!(got, want, "{} {sched}", c.name);
            }
            for w in [1, 2, 4] {
                let mut par = s.run(w).unwrap().sorted_answers();
                if c.tabled {
                    par.dedup();
                }
                let mut expect = want.clone();
                expect.sort();
                if c.tabled {
                    expect.dedup();
                }
                assert_eq!(par, expect, "{} {sched} workers {w}", c.name);
            }
        }
    }
}

#[test]
fn cut_over_generator_aborts_everywhere() {
    let s = spec(CUT_OVER_GENERATOR, CUT_OVER_GENERATOR_QUERY, Scheduling::Batched);
    for w in [0, 1, 2, 4, 8] {
        assert_eq!(s.run(w).err(), Some(EngineError::TabledPrune), "workers {w}");
    }
}

#[test]
fn cut_after_local_completion_is_allowed() {
    // Local scheduling completes t/1 before returning answers, so the cut
    // only prunes an iterator over a finished table.
    let s = spec(CUT_OVER_GENERATOR, CUT_OVER_GENERATOR_QUERY, Scheduling::Local);
    assert_eq!(s.run(0).unwrap().result.lines(), ["X=1"]);
}
