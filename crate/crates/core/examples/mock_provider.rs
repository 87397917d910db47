//! Drive the LLM client with a rule-based mock provider and parse the reply
//! as a modular solution.

use std::sync::Arc;

use mot_harness::corpus::{Problem, Split};
use mot_harness::llm::{LlmClient, MockProvider, ProviderConfig};
use mot_harness::promptgen::{build_mot_prompt, parse_mot_response};

const REPLY: &str = r#"### STEP 1
```python
def parse(line):
    """Split a line into two integers.

    Args:
        line (str)
    Returns:
        tuple[int, int]
    """
```

### STEP 2
```python
def parse(line):
    """Split a line into two integers."""
    a, b = line.split()
    return int(a), int(b)


a, b = parse(input())
print(a + b)
```
"#;

fn main() {
    let provider = MockProvider::from_rules(vec![(vec!["print their sum".into()], REPLY.into())]);
    let client = LlmClient::new(Arc::new(provider), ProviderConfig::default()).unwrap();

    let problem = Problem::new(
        "sum",
        "Read two integers and print their sum.",
        Split::Train,
    );
    let prompt = build_mot_prompt(&problem, "print(sum(map(int, input().split())))").unwrap();
    let completion = client.complete(&prompt).unwrap();

    let solution = parse_mot_response(&completion.text).unwrap();
    for m in &solution.outline {
        println!(
            "sub-module {}: {}",
            m.name,
            m.docstring.lines().next().unwrap_or("")
        );
    }
    println!("final program:\n{}", solution.final_code);
}
