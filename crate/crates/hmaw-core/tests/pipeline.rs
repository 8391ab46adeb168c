//! Cross-module laws of the pipeline: sequencing, skip connections,
//! determinism, and judging symmetry.

use std::cell::RefCell;
use std::time::Duration;

use proptest::prelude::*;

use hmaw_core::{
    build_chain, debiased_preference, extract_numeric_answer, run_workflow, Ablation,
    BackendError, CanonicalNumber, ChainConfig, ChatBackend, ChatRequest, ChatResponse,
    ContextRegistry, GenerationParams, Preference, Query, Role, Theme, DEFAULT_JUDGE_TEMPLATE,
};

/// Replays canned replies in order.
struct SeqMock {
    replies: Vec<String>,
    cursor: RefCell<usize>,
}

impl SeqMock {
    fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        SeqMock {
            replies: replies.into_iter().map(Into::into).collect(),
            cursor: RefCell::new(0),
        }
    }
}

impl ChatBackend for SeqMock {
    fn chat(&self, _request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let mut cursor = self.cursor.borrow_mut();
        let reply = self
            .replies
            .get(*cursor)
            .ok_or(BackendError::ScriptExhausted { calls: *cursor })?;
        *cursor += 1;
        Ok(ChatResponse::new(reply.clone(), Duration::from_millis(2)))
    }
}

/// Deterministic judge behaviors for the scoring laws.
#[derive(Debug, Clone, Copy)]
enum JudgeMode {
    AlwaysFirst,
    AlwaysSecond,
    Garbage,
    PreferLonger,
}

struct DeterministicJudge(JudgeMode);

fn response_sections(prompt: &str) -> (String, String) {
    let grab = |header: &str| -> String {
        let start = prompt.find(header).expect("header") + header.len();
        let rest = &prompt[start..];
        match rest.find("\n\n### ") {
            Some(end) => rest[..end].to_string(),
            None => rest.to_string(),
        }
    };
    (grab("### Response 1\n"), grab("### Response 2\n"))
}

impl ChatBackend for DeterministicJudge {
    fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
        let prompt = request.last_content();
        let reply = match self.0 {
            JudgeMode::AlwaysFirst => "1".to_string(),
            JudgeMode::AlwaysSecond => "2".to_string(),
            JudgeMode::Garbage => "cannot possibly say".to_string(),
            JudgeMode::PreferLonger => {
                let (r1, r2) = response_sections(prompt);
                if r1.len() >= r2.len() { "1" } else { "2" }.to_string()
            }
        };
        Ok(ChatResponse::new(reply, Duration::from_millis(1)))
    }
}

fn any_theme() -> impl Strategy<Value = Theme> {
    prop_oneof![
        Just(Theme::Company),
        Just(Theme::Government),
        Just(Theme::University),
        Just(Theme::Temple),
    ]
}

fn reply_strategy() -> impl Strategy<Value = String> {
    "[a-z]{2,10}"
}

fn query_marker() -> impl Strategy<Value = String> {
    // A token that cannot occur in context texts or in letter-only replies.
    (0u64..u64::MAX).prop_map(|v| format!("q-{v:016x}-marker"))
}

proptest! {
    /// One backend call per layer and every reply threads verbatim into the
    /// next layer's prompt, for every theme and supported length.
    #[test]
    fn call_count_and_threading(
        theme in any_theme(),
        seed_len in 1usize..=6,
        replies in proptest::collection::vec(reply_strategy(), 6),
        marker in query_marker(),
    ) {
        let len = 1 + seed_len % Theme::max_layers(&theme);
        let chain = build_chain(&ChainConfig::new(theme, len), &ContextRegistry::builtin()).unwrap();
        let query = Query::new("q", marker).unwrap();
        let mock = SeqMock::new(replies[..len].to_vec());
        let trace = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap();

        prop_assert_eq!(trace.steps.len(), len);
        prop_assert_eq!(*mock.cursor.borrow(), len);
        for j in 1..len {
            prop_assert!(trace.steps[j]
                .rendered_prompt
                .contains(&trace.steps[j - 1].backend_reply));
        }
        prop_assert_eq!(&trace.final_response, &trace.steps[len - 1].backend_reply);
        prop_assert_eq!(&trace.optimized_prompt, &trace.steps[len - 1].rendered_prompt);
    }

    /// The query text appears in a layer's prompt exactly when that layer's
    /// skip connection is on (the entry layer always sees it).
    #[test]
    fn skip_connection_presence(
        skip_manager in any::<bool>(),
        skip_worker in any::<bool>(),
        marker in query_marker(),
        replies in proptest::collection::vec(reply_strategy(), 3),
    ) {
        let config = ChainConfig::company_default()
            .with_skip_flags(vec![true, skip_manager, skip_worker]);
        let chain = build_chain(&config, &ContextRegistry::builtin()).unwrap();
        let query = Query::new("q", marker.clone()).unwrap();
        let mock = SeqMock::new(replies);
        let trace = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap();

        let expected = [true, skip_manager, skip_worker];
        for (step, expect) in trace.steps.iter().zip(expected) {
            prop_assert_eq!(step.rendered_prompt.contains(&marker), expect,
                "step {} skip={}", step.role, expect);
        }
    }

    /// Two runs of the same chain, query, and script produce byte-identical
    /// traces.
    #[test]
    fn assembly_is_deterministic(
        theme in any_theme(),
        seed_len in 1usize..=6,
        reversed in any::<bool>(),
        replies in proptest::collection::vec(reply_strategy(), 6),
        marker in query_marker(),
    ) {
        let len = 1 + seed_len % Theme::max_layers(&theme);
        let mut config = ChainConfig::new(theme, len);
        config.reversed = reversed;
        let chain = build_chain(&config, &ContextRegistry::builtin()).unwrap();
        let query = Query::new("q", marker).unwrap();
        let params = GenerationParams::default();

        let a = run_workflow(&chain, &query, &SeqMock::new(replies[..len].to_vec()), &params).unwrap();
        let b = run_workflow(&chain, &query, &SeqMock::new(replies[..len].to_vec()), &params).unwrap();
        prop_assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    /// debiased(a, b) + debiased(b, a) = 1 for any deterministic judge.
    #[test]
    fn judge_symmetry(
        mode in prop_oneof![
            Just(JudgeMode::AlwaysFirst),
            Just(JudgeMode::AlwaysSecond),
            Just(JudgeMode::Garbage),
            Just(JudgeMode::PreferLonger),
        ],
        a in "[a-z ]{1,30}",
        b in "[a-z ]{1,30}",
    ) {
        prop_assume!(!a.trim().is_empty() && !b.trim().is_empty());
        let judge = DeterministicJudge(mode);
        let query = Query::new("q", "which is better?").unwrap();
        let params = GenerationParams::default();
        let ab = debiased_preference(&judge, DEFAULT_JUDGE_TEMPLATE, &query, &a, &b, &params, 0).unwrap();
        let ba = debiased_preference(&judge, DEFAULT_JUDGE_TEMPLATE, &query, &b, &a, &params, 0).unwrap();
        prop_assert_eq!(ab.score + ba.score, 1.0);
    }

    /// Judges whose replies always parse yield scores only from {0, 0.5, 1},
    /// and position-only judges always yield exactly 0.5.
    #[test]
    fn score_domain_for_parsing_judges(
        mode in prop_oneof![
            Just(JudgeMode::AlwaysFirst),
            Just(JudgeMode::AlwaysSecond),
            Just(JudgeMode::PreferLonger),
        ],
        a in "[a-z ]{1,30}",
        b in "[a-z ]{1,30}",
    ) {
        prop_assume!(!a.trim().is_empty() && !b.trim().is_empty());
        let judge = DeterministicJudge(mode);
        let query = Query::new("q", "which is better?").unwrap();
        let params = GenerationParams::default();
        let s = debiased_preference(&judge, DEFAULT_JUDGE_TEMPLATE, &query, &a, &b, &params, 0).unwrap();
        prop_assert!(s.score == 0.0 || s.score == 0.5 || s.score == 1.0);
        if matches!(mode, JudgeMode::AlwaysFirst | JudgeMode::AlwaysSecond) {
            prop_assert_eq!(s.score, 0.5);
        }
        prop_assert_ne!(s.verdict_a_first.preferred, Preference::Invalid);
    }

    /// Planting a number at the end of arbitrary text makes it the
    /// extracted answer.
    #[test]
    fn planted_number_is_extracted(
        prefix in "[a-zA-Z ,]{0,40}",
        whole in -100_000i64..100_000,
        frac in 0u32..1000,
        punct in prop_oneof![Just(""), Just("."), Just("!"), Just(" exactly")],
    ) {
        let literal = format!("{whole}.{frac:03}");
        let text = format!("{prefix} {literal}{punct}");
        let expected = CanonicalNumber::parse(&literal).unwrap();
        prop_assert_eq!(extract_numeric_answer(&text), Some(expected));
    }
}

#[test]
fn drop_ablations_never_run_the_removed_role() {
    let registry = ContextRegistry::builtin();
    let query = Query::new("q", "marker-xyz").unwrap();
    let params = GenerationParams::default();

    let cases = [
        (Ablation::DropCeo, Role::Ceo),
        (Ablation::DropManager, Role::Manager),
    ];
    for (ablation, removed) in cases {
        let chain = build_chain(
            &ChainConfig::company_default().with_ablation(ablation),
            &registry,
        )
        .unwrap();
        let mock = SeqMock::new(["instr", "ans"]);
        let trace = run_workflow(&chain, &query, &mock, &params).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert!(
            trace.steps.iter().all(|s| s.role != removed),
            "{ablation} still ran {removed}"
        );
    }
}

#[test]
fn reversed_chain_runs_roles_backwards_with_responder_last() {
    let chain = build_chain(
        &ChainConfig::company_default().reversed(),
        &ContextRegistry::builtin(),
    )
    .unwrap();
    let query = Query::new("q", "marker-xyz").unwrap();
    let mock = SeqMock::new(["w", "m", "final"]);
    let trace = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap();
    let roles: Vec<Role> = trace.steps.iter().map(|s| s.role).collect();
    assert_eq!(roles, [Role::Worker, Role::Manager, Role::Ceo]);
    assert_eq!(trace.final_response, "final");
}
