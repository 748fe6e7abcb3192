use super::prompt::PromptSpec;
use super::provider::{ChatMessage, ChatProvider, ChatRequest};
use super::GenError;

#[derive(Debug, Clone, PartialEq)]
pub struct Repaired<T> {
    pub value: T,
    /// Re-asks needed before the reply parsed; 0 when the first one did.
    pub retries: usize,
}

/// Sends `prompt` and parses the reply, re-asking up to `max_retries` times
/// while the parser reports a repairable problem. Each re-ask carries the
/// rejected reply and the violation so the provider can correct itself.
pub fn complete_with_repair<T, F>(
    provider: &dyn ChatProvider,
    prompt: &PromptSpec,
    max_retries: usize,
    parse: F,
) -> Result<Repaired<T>, GenError>
where
    F: Fn(&str) -> Result<T, GenError>,
{
    let mut request = ChatRequest::from_prompt(prompt);
    let mut last = String::new();
    for attempt in 0..=max_retries {
        let reply = provider.complete(&request)?;
        match parse(&reply) {
            Ok(value) => return Ok(Repaired { value, retries: attempt }),
            Err(e) if e.is_repairable() => {
                log::debug!("reply rejected ({}), attempt {}: {e}", prompt.output_schema.name(), attempt + 1);
                last = e.to_string();
                request.messages.push(ChatMessage::assistant(reply));
                request.messages.push(ChatMessage::user(format!(
                    "Your reply was rejected: {e}. Reply again with one corrected JSON object that validates against the schema `{}`.",
                    prompt.output_schema.name()
                )));
            }
            Err(e) => return Err(e),
        }
    }
    Err(GenError::RepairExhausted { attempts: max_retries + 1, last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genpipe::{build_benefit_prompt, parse_benefit_output, ScriptedProvider};
    use crate::model::UseCase;

    const GOOD: &str = r#"{"benefits": [{"text": "faster checkout", "layer": "capability", "affected": ["user"]}]}"#;
    const BAD: &str = r#"{"benefits": [{"text": "faster checkout", "affected": ["user"]}]}"#;

    fn prompt() -> PromptSpec {
        let u = UseCase::new("payment", "facial recognition", "shops", "customers", "retail", "pay with your face");
        build_benefit_prompt(&u).unwrap()
    }

    #[test]
    fn first_reply_valid() {
        let provider = ScriptedProvider::new([GOOD]);
        let r = complete_with_repair(&provider, &prompt(), 3, parse_benefit_output).unwrap();
        assert_eq!(r.retries, 0);
        assert_eq!(r.value.len(), 1);
        assert_eq!(provider.calls(), 1);
    }

    #[test]
    fn one_repair() {
        let provider = ScriptedProvider::new([BAD, GOOD]);
        let r = complete_with_repair(&provider, &prompt(), 3, parse_benefit_output).unwrap();
        assert_eq!(r.retries, 1);
        let second = &provider.requests()[1];
        assert_eq!(second.messages.len(), 4);
        assert_eq!(second.messages[2].content, BAD);
        assert!(second.messages[3].content.contains("benefits[0].layer"), "{}", second.messages[3].content);
    }

    #[test]
    fn exhausted() {
        let provider = ScriptedProvider::new([BAD]).repeat_last();
        match complete_with_repair(&provider, &prompt(), 3, parse_benefit_output) {
            Err(GenError::RepairExhausted { attempts, last }) => {
                assert_eq!(attempts, 4);
                assert!(last.contains("benefits[0].layer"));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(provider.calls(), 4);

        let provider = ScriptedProvider::new([BAD]).repeat_last();
        assert!(matches!(
            complete_with_repair(&provider, &prompt(), 0, parse_benefit_output),
            Err(GenError::RepairExhausted { attempts: 1, .. })
        ));
    }

    #[test]
    fn transport_errors_are_not_retried() {
        let provider = ScriptedProvider::failing("connection refused");
        assert!(matches!(complete_with_repair(&provider, &prompt(), 3, parse_benefit_output), Err(GenError::Transport(_))));
        assert_eq!(provider.calls(), 1);
    }
}
