pub mod corpus;
pub mod evaluate;
pub mod llm;
pub mod metrics;
pub mod pipeline;
pub mod promptgen;
pub mod sandbox;
pub mod validator;
