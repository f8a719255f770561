use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use htnplan::bench::{MemoryEnforcement, RunRecord, RunStatus};
use htnplan::pipeline::*;
use htnplan::search::Algorithm;
use htnplan::suite::{SourceReader, SuiteManifest};
use htnplan_testkit::{benchmarks, load};
use proptest::prelude::*;

fn transport() -> SuiteManifest {
    SuiteManifest::load(&benchmarks().join("transport")).unwrap()
}

fn id(ordinal: usize) -> CandidateId {
    CandidateId {
        model: "m".into(),
        domain: "d".into(),
        ordinal,
    }
}

fn hel_reply(name: &str, eval: &str) -> String {
    format!("NAME: {name}\n\n```hel\n(heuristic \"{name}\" (init (def c (tdg-table 1 100))) (eval {eval}))\n```\n")
}

#[test]
fn prompt_sections() {
    let suite = transport();
    let spec = prompt_spec(&suite, &SourceReader::new()).unwrap();
    assert_eq!(spec.domain_name, "transport");
    assert_eq!(
        spec.smallest_problem_text,
        std::fs::read_to_string(&suite.training).unwrap()
    );
    assert_eq!(
        spec.largest_problem_text,
        std::fs::read_to_string(suite.largest().unwrap()).unwrap()
    );

    let with = build_prompt(&spec);
    assert_eq!(with, build_prompt(&spec));
    assert_eq!(with.matches(HINTS_INTRO).count(), 1);
    let hints = spec.hint_block.clone().unwrap();
    for part in [
        &hints.representation_caveats,
        &hints.bottleneck,
        &hints.construction_guidance,
    ] {
        assert!(with.contains(part.trim()));
    }
    let order: Vec<usize> = ["## 1.", "## 2.", "## 3.", "## 4.", "## 5.", "## 9."]
        .iter()
        .map(|h| with.find(h).unwrap_or_else(|| panic!("{h} missing")))
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");

    let without = build_prompt(&PromptSpec {
        hint_block: None,
        ..spec.clone()
    });
    assert!(!without.contains(HINTS_INTRO));
    assert!(!without.contains("## 4."));
    assert!(without.contains(INTERFACE_DOCS.trim_end()));
    assert!(without.contains(WORKED_EXAMPLE.trim_end()));
}

fn baseline(expanded: u64) -> RunRecord {
    RunRecord {
        domain: "transport".into(),
        problem: "p01".into(),
        system: "tdg".into(),
        algorithm: Algorithm::Gbfs,
        status: RunStatus::Solved,
        expanded,
        plan_length: 12,
        wall_time: 0.5,
        memory_enforcement: MemoryEnforcement::Advisory,
        diagnostic: None,
    }
}

fn evaluated(eval: &str, status: CandidateStatus, expanded: Option<u64>) -> CandidateRecord {
    let mut r = CandidateRecord::from_response(id(0), Ok(hel_reply("prev", eval)));
    r.status = status;
    r.training_expanded = expanded;
    r.training_plan_length = expanded.map(|_| 12);
    r
}

#[test]
fn refinement_advice_follows_the_outcome() {
    let spec = prompt_spec(&transport(), &SourceReader::new()).unwrap();
    let base = build_prompt(&spec);
    let advice = [
        ADVICE_TIMEOUT,
        ADVICE_STATE,
        ADVICE_SECOND_BOUND,
        ADVICE_BETTER,
        ADVICE_ERROR,
    ];
    let cases = [
        (
            evaluated("(network-cost c)", CandidateStatus::TimedOut, None),
            vec![ADVICE_TIMEOUT],
        ),
        (
            evaluated("(network-cost c)", CandidateStatus::Ok, Some(900)),
            vec![ADVICE_STATE, ADVICE_SECOND_BOUND],
        ),
        (
            evaluated("(max (network-cost c) 1)", CandidateStatus::Ok, Some(900)),
            vec![ADVICE_STATE],
        ),
        (
            evaluated("(network-cost c)", CandidateStatus::Ok, Some(10)),
            vec![ADVICE_BETTER],
        ),
        (
            evaluated("(network-cost c)", CandidateStatus::RuntimeFailed, None),
            vec![ADVICE_ERROR],
        ),
    ];
    for (prev, want) in cases {
        let p = build_refinement_prompt(&spec, &prev, &baseline(100));
        assert!(p.starts_with(&base));
        assert!(p.contains(KEEP_PREVIOUS));
        assert!(p.contains(prev.program_text.as_deref().unwrap()));
        for a in advice {
            assert_eq!(
                p.contains(a),
                want.contains(&a),
                "{:?} {:?}: {a}",
                prev.status,
                prev.training_expanded
            );
        }
    }
}

#[test]
fn mock_generation_stores_every_reply() {
    let dir = tempfile::tempdir().unwrap();
    let store = CandidateStore::create(dir.path()).unwrap();
    let provider = MockProvider::from_replies(vec![
        MockReply::Text(hel_reply("a", "(network-cost c)")),
        MockReply::Text("no program here".into()),
        MockReply::Failure("transport: refused".into()),
    ]);
    let records = generate(&transport(), &provider, 3, &store).unwrap();
    let statuses: Vec<_> = records.iter().map(|r| r.status).collect();
    assert_eq!(
        statuses,
        [
            CandidateStatus::Parsed,
            CandidateStatus::ParseFailed,
            CandidateStatus::ParseFailed
        ]
    );
    assert_eq!(records[0].declared_name.as_deref(), Some("a"));
    assert_eq!(records[2].diagnostic.as_deref(), Some("transport: refused"));
    assert_eq!(
        store.load_candidates().unwrap(),
        records
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.reparse();
                r
            })
            .collect::<Vec<_>>()
    );
    let prompt = std::fs::read_to_string(dir.path().join("prompt.md")).unwrap();
    assert!(prompt.contains(HINTS_INTRO));
    for i in 0..3 {
        assert!(store.meta_path(i).is_file() && store.program_path(i).is_file());
    }
    let timings = std::fs::read_to_string(dir.path().join("timings.jsonl")).unwrap();
    assert_eq!(timings.lines().count(), 3);
}

/// A chat-completions endpoint that fails the first `fail_first` requests.
fn serve(fail_first: usize) -> (String, Arc<Mutex<Vec<String>>>, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let count = Arc::new(AtomicUsize::new(0));
    let (b, c) = (bodies.clone(), count.clone());
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let mut stream = stream.unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line.trim().is_empty() {
                    break;
                }
                if let Some(v) = line.to_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; len];
            reader.read_exact(&mut body).unwrap();
            b.lock().unwrap().push(String::from_utf8(body).unwrap());
            let (status, payload) = if c.fetch_add(1, Ordering::SeqCst) < fail_first {
                ("500 Internal Server Error", "{}".to_string())
            } else {
                let content = hel_reply("remote", "(network-cost c)");
                (
                    "200 OK",
                    serde_json::json!({ "choices": [{ "message": { "content": content } }] })
                        .to_string(),
                )
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    (url, bodies, count)
}

fn http(url: &str, retries: u32) -> HttpProvider {
    HttpProvider::new(ProviderConfig {
        base_url: url.into(),
        model: "test-model".into(),
        api_key_env: "HTNPLAN_TEST_UNSET_KEY".into(),
        max_tokens: 64,
        in_flight: 4,
        retries,
        timeout_secs: 10,
    })
    .with_backoff(Duration::from_millis(1))
}

#[test]
fn http_transport_failures_are_recorded_not_fatal() {
    let (url, bodies, _) = serve(1);
    let replies = request_candidates("the prompt", &http(&url, 0), 20);
    assert_eq!(replies.len(), 20);
    let failed: Vec<_> = replies.iter().filter(|r| r.result.is_err()).collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0]
        .result
        .as_ref()
        .unwrap_err()
        .starts_with("transport"));
    let records: Vec<_> = replies
        .into_iter()
        .map(|r| CandidateRecord::from_response(id(r.ordinal), r.result))
        .collect();
    assert_eq!(
        records
            .iter()
            .filter(|r| r.status == CandidateStatus::Parsed)
            .count(),
        19
    );

    let body: serde_json::Value = serde_json::from_str(&bodies.lock().unwrap()[0]).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["max_tokens"], 64);
    assert_eq!(body["messages"][0]["content"], "the prompt");
}

#[test]
fn http_retries_recover() {
    let (url, _, count) = serve(2);
    let replies = request_candidates("p", &http(&url, 2), 5);
    assert!(replies.iter().all(|r| r.result.is_ok()));
    assert_eq!(count.load(Ordering::SeqCst), 7);

    let (url, _, count) = serve(100);
    let r = http(&url, 5).complete(0, "p");
    assert!(r.is_err());
    // At most MAX_RETRIES retries, whatever the configuration says.
    assert_eq!(count.load(Ordering::SeqCst), 1 + MAX_RETRIES as usize);
}

#[test]
fn selection_reads_only_the_training_problem() {
    let src = benchmarks().join("transport");
    let dir = tempfile::tempdir().unwrap();
    let suite_dir = dir.path().join("transport");
    std::fs::create_dir(&suite_dir).unwrap();
    for f in [
        "manifest.json",
        "domain.hddl",
        "hints.json",
        "p01.hddl",
        "p02.hddl",
        "p03.hddl",
        "p04.hddl",
    ] {
        std::fs::copy(src.join(f), suite_dir.join(f)).unwrap();
    }
    let suite = SuiteManifest::load(&suite_dir).unwrap();
    let store = CandidateStore::create(&dir.path().join("cands")).unwrap();
    let provider =
        MockProvider::from_replies(vec![MockReply::Text(hel_reply("a", "(network-cost c)"))]);
    generate(&suite, &provider, 2, &store).unwrap();

    // Selection must not need anything but the domain and the training problem.
    for p in suite.problems.iter().filter(|p| **p != suite.training) {
        std::fs::write(p, "this file must not be read").unwrap();
    }
    std::fs::write(suite_dir.join("hints.json"), "not json").unwrap();
    let config = EvalConfig {
        timeout: Duration::from_secs(20),
        ..EvalConfig::default()
    };
    let s = select_stage(&suite, &store, &config, 2).unwrap();
    assert_eq!(s.selected.unwrap().ordinal, 0);
    assert_eq!(
        std::fs::read_to_string(store.selected_program_path()).unwrap(),
        s.candidates[0].program_text.clone().unwrap()
    );
}

fn noop_empty() -> htnplan::ground::GroundedModel {
    let dir = benchmarks().join("micro");
    load(&dir.join("noop-domain.hddl"), &dir.join("noop-empty.hddl"))
}

#[test]
fn candidate_evaluation_outcomes() {
    let cfg = EvalConfig {
        timeout: Duration::from_secs(10),
        ..EvalConfig::default()
    };
    let zero = CandidateRecord::from_response(
        id(0),
        Ok("```hel\n(heuristic \"z\" (init) (eval 0))\n```".into()),
    );
    let r = evaluate_candidate(zero.clone(), &noop_empty(), &cfg);
    assert_eq!(
        (r.status, r.training_expanded, r.training_plan_length),
        (CandidateStatus::Ok, Some(0), Some(0))
    );

    let model = load(
        &benchmarks().join("transport/domain.hddl"),
        &transport().training,
    );
    let fault = CandidateRecord::from_response(id(1), Ok(hel_reply("f", "(+ c 1)")));
    let r = evaluate_candidate(fault, &model, &cfg);
    assert_eq!(r.status, CandidateStatus::RuntimeFailed);
    assert!(r.diagnostic.unwrap().starts_with("heuristic-failed"));

    let budget = EvalConfig {
        node_budget: Some(3),
        ..cfg
    };
    let r = evaluate_candidate(zero.clone(), &model, &budget);
    assert_eq!(r.status, CandidateStatus::TimedOut);

    let negative =
        CandidateRecord::from_response(id(2), Ok(hel_reply("n", "(- (network-cost c) 1000)")));
    let r = evaluate_candidate(negative, &model, &cfg);
    assert_eq!(r.status, CandidateStatus::Ok);
    assert!(r.diagnostic.unwrap().contains("clamped"));

    // Records that never parsed are passed through untouched.
    let broken = CandidateRecord::from_response(id(3), Ok("```hel\n(heuristic\n```".into()));
    assert_eq!(evaluate_candidate(broken.clone(), &model, &cfg), broken);
}

fn arb_record() -> impl Strategy<Value = (usize, bool, u64, usize)> {
    (0usize..6, any::<bool>(), 0u64..5, 0usize..4)
}

proptest! {
    #[test]
    fn selection_follows_the_rule_in_any_order(
        raw in prop::collection::vec(arb_record(), 1..12),
        seed in any::<u64>(),
    ) {
        let records: Vec<CandidateRecord> = raw.iter().enumerate().map(|(i, &(status, _, expanded, len))| {
            let mut r = CandidateRecord::from_response(id(i), Err("x".into()));
            r.status = CandidateStatus::ALL[status];
            if r.status == CandidateStatus::Ok {
                r.training_expanded = Some(expanded);
                r.training_plan_length = Some(len);
            }
            r
        }).collect();
        let want = records
            .iter()
            .filter(|r| r.status == CandidateStatus::Ok)
            .map(|r| (r.training_expanded.unwrap(), r.training_plan_length.unwrap(), r.id.ordinal))
            .min()
            .map(|k| k.2);

        let mut shuffled = records.clone();
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = select(records.clone());
        let b = select(shuffled);
        prop_assert_eq!(a.selected.as_ref().map(|i| i.ordinal), want);
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert_eq!(a.status_counts.values().sum::<usize>(), records.len());
    }
}
