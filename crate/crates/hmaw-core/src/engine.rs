//! Sequential execution of a layer chain.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::time::Duration;

use crate::backend::{BackendError, ChatBackend, ChatRequest, GenerationParams};
use crate::chain::LayerChain;
use crate::prompt::{render_prompt, PromptError, UpstreamInstruction};
use crate::role::{Query, Role};
use crate::trace::{StepRecord, WorkflowTrace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorkflowError {
    #[error("backend failed at step {step} ({role}): {source}")]
    Backend {
        step: usize,
        role: Role,
        source: BackendError,
    },
    /// A layer replied with only whitespace. The run aborts rather than
    /// passing an empty instruction downstream, which would let ablation
    /// comparisons degrade silently.
    #[error("step {step} ({role}) returned an empty reply")]
    EmptyBackendReply { step: usize, role: Role },
    #[error("prompt assembly failed: {0}")]
    Prompt(#[from] PromptError),
}

/// Run a query through a chain, one backend call per layer, each layer's
/// reply threading into the next layer's prompt. The responder layer's
/// prompt and reply become the trace's optimized prompt and final response.
pub fn run_workflow<B: ChatBackend + ?Sized>(
    chain: &LayerChain,
    query: &Query,
    backend: &B,
    params: &GenerationParams,
) -> Result<WorkflowTrace, WorkflowError> {
    let mut steps: Vec<StepRecord> = Vec::with_capacity(chain.len());
    let mut upstream: Option<UpstreamInstruction> = None;
    let mut total_latency = Duration::ZERO;

    for (index, layer) in chain.layers.iter().enumerate() {
        let prompt = render_prompt(layer, upstream.as_ref(), query)?;
        let request = ChatRequest::single_user(params, prompt.clone());
        let response = backend.chat(&request).map_err(|source| WorkflowError::Backend {
            step: index,
            role: layer.role,
            source,
        })?;
        if response.content.trim().is_empty() {
            return Err(WorkflowError::EmptyBackendReply {
                step: index,
                role: layer.role,
            });
        }
        total_latency += response.latency;
        upstream = Some(UpstreamInstruction::new(layer.role, response.content.clone()));
        steps.push(StepRecord {
            role: layer.role,
            rendered_prompt: prompt,
            backend_reply: response.content,
            latency: response.latency,
            prompt_tokens: response.prompt_tokens,
            completion_tokens: response.completion_tokens,
        });
    }

    let responder = steps.last().expect("chain has at least one layer");
    Ok(WorkflowTrace {
        query_id: query.id.clone(),
        optimized_prompt: responder.rendered_prompt.clone(),
        final_response: responder.backend_reply.to_string(),
        total_latency,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::ChatResponse;
    use crate::chain::{build_chain, Ablation, ChainConfig};
    use crate::context::ContextRegistry;
    use crate::role::Theme;
    use core::cell::RefCell;

    /// Replays canned replies in order and logs every request.
    struct SeqMock {
        replies: Vec<&'static str>,
        calls: RefCell<Vec<String>>,
    }

    impl SeqMock {
        fn new(replies: Vec<&'static str>) -> Self {
            SeqMock {
                replies,
                calls: RefCell::new(Vec::new()),
            }
        }
    }

    impl ChatBackend for SeqMock {
        fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, BackendError> {
            let mut calls = self.calls.borrow_mut();
            let index = calls.len();
            calls.push(request.last_content().to_string());
            let reply = self
                .replies
                .get(index)
                .ok_or(BackendError::ScriptExhausted { calls: index })?;
            Ok(ChatResponse::new(*reply, Duration::from_millis(5)))
        }
    }

    fn company(n: usize) -> LayerChain {
        build_chain(&ChainConfig::new(Theme::Company, n), &ContextRegistry::builtin()).unwrap()
    }

    #[test]
    fn three_layer_run_threads_replies_in_order() {
        let chain = company(3);
        let query = Query::new("q1", "QRY-unique-token").unwrap();
        let mock = SeqMock::new(alloc::vec!["i1", "i2", "ans"]);
        let trace = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap();

        assert_eq!(trace.steps.len(), 3);
        assert_eq!(mock.calls.borrow().len(), 3);
        let replies: Vec<&str> = trace.steps.iter().map(|s| s.backend_reply.as_str()).collect();
        assert_eq!(replies, ["i1", "i2", "ans"]);
        assert_eq!(trace.final_response, "ans");
        assert_eq!(trace.optimized_prompt, trace.steps[2].rendered_prompt);
        assert!(trace.steps[1].rendered_prompt.contains("i1"));
        assert!(trace.steps[2].rendered_prompt.contains("i2"));
        assert_eq!(trace.total_latency, Duration::from_millis(15));
    }

    #[test]
    fn single_layer_run_makes_one_call() {
        let chain = company(1);
        let query = Query::new("q1", "QRY-unique-token").unwrap();
        let mock = SeqMock::new(alloc::vec!["ans"]);
        let trace = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap();
        assert_eq!(mock.calls.borrow().len(), 1);
        let expected = render_prompt(&chain.layers[0], None, &query).unwrap();
        assert_eq!(trace.optimized_prompt, expected);
    }

    #[test]
    fn drop_manager_worker_sees_ceo_instruction_and_query() {
        let chain = build_chain(
            &ChainConfig::company_default().with_ablation(Ablation::DropManager),
            &ContextRegistry::builtin(),
        )
        .unwrap();
        let query = Query::new("q1", "QRY-unique-token").unwrap();
        let mock = SeqMock::new(alloc::vec!["ceo-instr", "ans"]);
        let trace = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap();
        assert_eq!(mock.calls.borrow().len(), 2);
        assert!(trace.optimized_prompt.contains("ceo-instr"));
        assert!(trace.optimized_prompt.contains("QRY-unique-token"));
    }

    #[test]
    fn whitespace_reply_aborts_the_run() {
        let chain = company(3);
        let query = Query::new("q1", "QRY-unique-token").unwrap();
        let mock = SeqMock::new(alloc::vec!["i1", "   \n ", "never reached"]);
        let err = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap_err();
        assert!(matches!(
            err,
            WorkflowError::EmptyBackendReply { step: 1, role: Role::Manager }
        ));
        assert_eq!(mock.calls.borrow().len(), 2);
    }

    #[test]
    fn backend_failure_carries_step_index() {
        let chain = company(3);
        let query = Query::new("q1", "QRY-unique-token").unwrap();
        let mock = SeqMock::new(alloc::vec!["i1"]);
        let err = run_workflow(&chain, &query, &mock, &GenerationParams::default()).unwrap_err();
        assert!(matches!(
            err,
            WorkflowError::Backend { step: 1, role: Role::Manager, .. }
        ));
    }
}
