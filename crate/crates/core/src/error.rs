use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("unsupported PSK order {0} (expected 2, 4, 8 or 16)")]
    UnsupportedOrder(usize),
    #[error("bit count {bits} is not a multiple of {bits_per_symbol}")]
    BitCount { bits: usize, bits_per_symbol: usize },
    #[error("symbol modulus {0} is not 1")]
    NotUnitModulus(f64),
    #[error("unknown channel profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid channel profile: {0}")]
    InvalidProfile(String),
    #[error("tap delay {delay_s:e} s maps to sample {sample}, beyond the cyclic prefix of {cp_len}")]
    DelayExceedsCp {
        delay_s: f64,
        sample: usize,
        cp_len: usize,
    },
    #[error("subcarrier {n} is not active for N = {fft_len}")]
    InactiveSubcarrier { n: usize, fft_len: usize },
    #[error("expected length {expected}, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("inactive subcarrier {0} carries energy")]
    InactiveEnergy(usize),
    #[error("degenerate I/Q imbalance: alpha is zero")]
    DegenerateIqi,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
