use std::sync::{Arc, Mutex};

use mops::orchestrator::{render_run, run_suite, run_task, run_task_with, EndReason, RunConfig, RunRecord};
use mops::proposer::{builtin_fixture, ChatRequest, ChatTransport, Proposer, ProposerBackend, TransportError};
use mops::task::TaskId;

fn small(task: TaskId, budget: usize) -> RunConfig {
    RunConfig { budget, seeds: vec![0, 1], max_feedback: 1, ..RunConfig::new(task) }
}

#[test]
fn suite_writes_reloadable_run_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [small(TaskId::Line, 60), small(TaskId::Pentagon, 60)];
    let (summary, records) = run_suite(&configs, Some(1), Some(tmp.path())).unwrap();
    assert_eq!(summary.rows.len(), 2);
    for name in ["summary.json", "summary.md"] {
        assert!(tmp.path().join(name).is_file(), "{name}");
    }
    let shapes = [("line_cmaes_scripted-good", "layout.svg"), ("pentagon_cmaes_scripted-good", "drawing.svg")];
    for ((group, figure), (row, runs)) in shapes.iter().zip(summary.rows.iter().zip(&records)) {
        let dir = tmp.path().join(group);
        assert_eq!(row.run_dir.as_deref(), Some(dir.as_path()));
        assert!(dir.join("curves.svg").is_file() && dir.join("feedback.svg").is_file());
        for r in runs {
            let seed_dir = dir.join(format!("seed-{}", r.seed));
            for f in ["config.toml", "record.json", "transcript.json", "evaluations.jsonl", "curves.csv", "summary.json", "curve.svg", figure] {
                assert!(seed_dir.join(f).is_file(), "{}", seed_dir.join(f).display());
            }
            let lines = std::fs::read_to_string(seed_dir.join("evaluations.jsonl")).unwrap().lines().count();
            assert_eq!(lines, r.total_evaluations);
            let loaded = RunRecord::load(&seed_dir).unwrap();
            assert_eq!(loaded.iterations.len(), r.iterations.len());
            assert_eq!(loaded.final_cost, r.final_cost);
            let cfg = RunConfig::from_toml(&std::fs::read_to_string(seed_dir.join("config.toml")).unwrap()).unwrap();
            assert_eq!(cfg.seeds, vec![r.seed]);

            std::fs::remove_file(seed_dir.join("curve.svg")).unwrap();
            let rendered = render_run(&seed_dir).unwrap();
            assert_eq!(rendered.len(), 2);
            assert!(seed_dir.join("curve.svg").is_file());
        }
        let (mean, _) = mops::orchestrator::mean_interval(&row.metrics);
        assert_eq!(mean, row.mean);
    }
}

#[test]
fn reruns_are_identical_apart_from_timings() {
    for (task, method) in [(TaskId::Star, "random"), (TaskId::Avoid, "hillclimb")] {
        let cfg = RunConfig { optimizer: method.parse().unwrap(), ..small(task, 40) };
        let a = run_task(&cfg, 3).unwrap();
        let b = run_task(&cfg, 3).unwrap();
        assert_eq!(a.without_timings(), b.without_timings(), "{task}");
        assert!(a.total_evaluations <= cfg.budget * (cfg.max_feedback + 1));
    }
}

/// Replies from a canned list and keeps every request it was sent.
struct Canned {
    replies: Vec<String>,
    seen: Arc<Mutex<Vec<ChatRequest>>>,
}

impl ChatTransport for Canned {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut seen = self.seen.lock().unwrap();
        seen.push(request.clone());
        self.replies
            .get(seen.len() - 1)
            .cloned()
            .ok_or_else(|| TransportError("no more replies".into()))
    }
}

#[test]
fn chat_backend_receives_feedback_and_recovers_from_bad_replies() {
    let turns = builtin_fixture(TaskId::Pentagon, "adversarial").unwrap();
    let replies = vec![
        "I would draw five lines.".to_string(),
        format!("Here it is:\n```\n{}\n```", turns[0]),
        format!("```mplan\n{}\n```", turns[1]),
    ];
    let seen = Arc::new(Mutex::new(Vec::new()));
    let backend = ProposerBackend::Llm {
        endpoint: "http://unused.invalid".into(),
        model: "canned".into(),
        temperature: 0.0,
        max_retries: 2,
    };
    let proposer = Proposer::with_transport(backend, Box::new(Canned { replies, seen: seen.clone() })).unwrap();
    let cfg = RunConfig { budget: 30, max_feedback: 1, target_cost: Some(0.0), ..RunConfig::new(TaskId::Pentagon) };
    let record = run_task_with(&cfg, 0, proposer).unwrap();

    assert_eq!(record.proposer, "llm:canned");
    assert_eq!(record.iterations.len(), 2);
    assert_eq!(record.ended_by, EndReason::FeedbackExhausted);
    assert_eq!(record.iterations[0].retries.len(), 2);
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    assert!(seen[1].messages.last().unwrap().content.contains("no fenced code block"));
    let feedback = record.iterations[0].feedback.as_ref().unwrap();
    let last = &seen[2].messages.last().unwrap().content;
    assert!(last.contains(&format!("{:.4}", feedback.best_cost)), "{last}");
    assert!(record.iterations[1].feedback.is_none());
}
