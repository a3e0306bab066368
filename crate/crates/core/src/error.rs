use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("qubit {qubit} out of range for width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },

    #[error("control and target must differ (both {0})")]
    SameControlTarget(usize),

    #[error("value {value} does not fit register `{register}` of {width} qubits")]
    ValueOverflow {
        register: String,
        value: u128,
        width: usize,
    },

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("duplicate register `{0}`")]
    DuplicateRegister(String),

    #[error("registers overlap")]
    RegisterOverlap,

    #[error("register of width {0} exceeds the 128-qubit value limit")]
    RegisterTooWide(usize),

    #[error("map is not a bijection: {0}")]
    NotBijective(String),

    #[error("controls overlap the target qubits of the inner operation")]
    ControlOverlap,

    #[error("width mismatch: expected {expected}, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },

    #[error("dense backend supports at most {max} qubits, got {width}")]
    DenseTooLarge { width: usize, max: usize },

    #[error("register is not in a definite basis value")]
    NotDefinite,

    #[error("strict mode: {0}")]
    Strict(String),

    #[error("ancillas not restored after oracle application")]
    AncillaNotRestored,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid circle: {0}")]
    InvalidCircle(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
