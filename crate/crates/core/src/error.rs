use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown network preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{name}` is only defined for 3 agents, got {n_agents}")]
    PresetSize { name: &'static str, n_agents: usize },
    #[error("weight matrix must be square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("weight matrix must have at least one agent")]
    EmptyNetwork,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("agent index {index} out of range for {n_agents} agents")]
    AgentIndex { index: usize, n_agents: usize },
    #[error("length mismatch in {context}: {left} vs {right}")]
    LengthMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
    #[error("weighted product undefined: zero reward at index {0} raised to a negative weight")]
    ZeroToNegativePower(usize),
    #[error("negative reward {value} at index {index}")]
    NegativeReward { index: usize, value: f64 },
    #[error("invalid world config: {0}")]
    WorldConfig(String),
    #[error("invalid network shape: {0}")]
    Shape(String),
    #[error("invalid training config: {0}")]
    TrainConfig(String),
    #[error("training diverged at episode {episode}: {what}")]
    Diverged { episode: usize, what: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
