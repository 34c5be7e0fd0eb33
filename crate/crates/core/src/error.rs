use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient samples: need {needed}, have {have}")]
    InsufficientSamples { needed: usize, have: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample-rate mismatch: {0}")]
    SampleRateMismatch(String),

    #[error("channel index {0} outside 0-39")]
    BadChannel(u32),

    #[error("payload of {len} bytes exceeds advertising payload (max {max})")]
    ExceedsAdvertisingPayload { len: usize, max: usize },

    #[error("no packet detected")]
    NoPacketDetected,

    #[error("reflection coefficient singular: z_a + z_c == 0")]
    Singularity,

    #[error("unrealizable constellation point {re:+.3}{im:+.3}j")]
    UnrealizableConstellation { re: f64, im: f64 },

    #[error("zero scrambler seed")]
    ZeroSeed,

    #[error("odd bit count {0} at 2 Mbps")]
    OddBitCount(usize),

    #[error("bit count {count} is not a multiple of {block}")]
    MisalignedBits { count: usize, block: usize },

    #[error("cannot fit a 1 Mbps Wi-Fi packet in a single advertising packet")]
    OneMbpsDoesNotFit,

    #[error("unsupported rate {0} Mbps")]
    UnknownRate(f64),

    #[error("advert budget exceeded at {rate} Mbps: PSDU of {psdu} bytes, max {max_psdu} (max payload {max_payload})")]
    BudgetExceeded { rate: f64, psdu: usize, max_psdu: usize, max_payload: usize },

    #[error("no packet")]
    NoPacket,

    #[error("header error")]
    HeaderError,

    #[error("payload too large: {len} bytes (max {max})")]
    PayloadTooLarge { len: usize, max: usize },

    #[error("unachievable symbol plan: {0}")]
    UnachievablePlan(String),

    #[error("no downlink frame")]
    NoDownlinkFrame,

    #[error("zero-power input")]
    ZeroPower,

    #[error("io: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
