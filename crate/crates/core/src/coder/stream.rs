use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::bits::{gamma_len, read_gamma, unzigzag, write_gamma, zigzag, BitReader, BitWriter};
use super::entropy::KtModel;
use super::CoderConfig;
use crate::error::{Error, Result};
use crate::linalg::compensated_sum;
use crate::report::{ser_sig, ser_sig_vec};

pub const MAGIC: &[u8; 4] = b"CRDL";
pub const VERSION: u16 = 1;
/// Preamble (magic, version, reserved, N) plus parameter block (Δ, β, seed, checksum).
pub const HEADER_LEN: usize = 48;
/// Gamma value reserved as the escape sentinel; it is followed by the raw
/// 64-bit two's-complement index.
pub const ESCAPE: u64 = 1 << 20;

/// Ties the stream to the decoder's configuration.
fn config_checksum(cfg: &CoderConfig, n: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(cfg.step.to_le_bytes());
    h.update(cfg.scaling.to_le_bytes());
    h.update(cfg.predictor.to_le_bytes());
    h.update(cfg.dither_seed.to_le_bytes());
    h.update(n.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

fn write_header(out: &mut Vec<u8>, cfg: &CoderConfig, n: u64) {
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&cfg.step.to_le_bytes());
    out.extend_from_slice(&cfg.scaling.to_le_bytes());
    out.extend_from_slice(&cfg.dither_seed.to_le_bytes());
    out.extend_from_slice(&config_checksum(cfg, n).to_le_bytes());
}

fn le_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b.try_into().expect("8 bytes"))
}

/// Sum of `2^-len` over every codeword of the index code.
pub fn kraft_sum() -> f64 {
    // 2^L values share length 2L+1 for each L below the escape level.
    let levels = 63 - ESCAPE.leading_zeros();
    let regular: f64 = (0..levels).map(|l| 2f64.powi(-(l as i32) - 1)).sum();
    regular + 2f64.powi(-((gamma_len(ESCAPE) + 64) as i32))
}

fn write_index(w: &mut BitWriter, i: i64) -> u32 {
    let z = zigzag(i);
    if z < ESCAPE - 1 {
        write_gamma(w, z + 1);
        gamma_len(z + 1)
    } else {
        write_gamma(w, ESCAPE);
        w.push_bits(i as u64, 64);
        gamma_len(ESCAPE) + 64
    }
}

fn read_index(r: &mut BitReader<'_>) -> Option<i64> {
    let v = read_gamma(r)?;
    if v == ESCAPE {
        r.bits(64).map(|raw| raw as i64)
    } else if v < ESCAPE {
        Some(unzigzag(v - 1))
    } else {
        None
    }
}

struct Dither {
    rng: ChaCha8Rng,
    step: f64,
}

impl Dither {
    fn new(cfg: &CoderConfig) -> Self {
        Dither {
            rng: ChaCha8Rng::seed_from_u64(cfg.dither_seed),
            step: cfg.step,
        }
    }

    /// Uniform on `(−Δ/2, Δ/2]`.
    fn next(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        self.step / 2.0 - self.step * u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitstreamStats {
    pub samples: usize,
    /// Leading samples excluded from the figures below.
    pub skipped: usize,
    #[serde(serialize_with = "ser_sig")]
    pub mse: f64,
    #[serde(serialize_with = "ser_sig")]
    pub entropy_rate_bits: f64,
    #[serde(serialize_with = "ser_sig")]
    pub prefix_rate_bits: f64,
    /// Variance of the quantizer noise `iΔ − z − u`.
    #[serde(serialize_with = "ser_sig")]
    pub error_variance: f64,
    /// Autocorrelation of the quantizer noise at lags 1..8.
    #[serde(serialize_with = "ser_sig_vec")]
    pub error_autocorr: Vec<f64>,
    /// Correlation between quantizer noise and quantizer input.
    #[serde(serialize_with = "ser_sig")]
    pub error_input_corr: f64,
    pub payload_bits: u64,
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub indices: Vec<i64>,
    pub bitstream: Vec<u8>,
    /// The encoder's in-loop reconstruction.
    pub reconstruction: Vec<f64>,
    /// Quantizer input `u` and noise `iΔ − z − u`.
    pub inputs: Vec<f64>,
    pub noise: Vec<f64>,
    pub stats: BitstreamStats,
}

pub fn encode(x: &[f64], cfg: &CoderConfig) -> Result<Encoded> {
    cfg.validate()?;
    if let Some(k) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite input at sample {k}")));
    }
    let n = x.len();
    let skip = cfg.startup_skip().min(n);
    let (a, step, beta) = (cfg.predictor, cfg.step, cfg.scaling);
    let mut dither = Dither::new(cfg);
    let mut model = KtModel::new();
    let mut w = BitWriter::default();
    let mut bitstream = Vec::with_capacity(HEADER_LEN + n / 2);
    write_header(&mut bitstream, cfg, n as u64);

    let mut indices = Vec::with_capacity(n);
    let mut reconstruction = Vec::with_capacity(n);
    let mut inputs = Vec::with_capacity(n);
    let mut noise = Vec::with_capacity(n);
    let mut entropy_bits = Vec::with_capacity(n);
    let mut prefix_bits = 0u64;
    let mut y_prev = 0.0;
    for (k, &xk) in x.iter().enumerate() {
        let u = xk - a * y_prev;
        let z = dither.next();
        let q = ((u + z) / step).round();
        let i = q as i64;
        let len = write_index(&mut w, i);
        let zig = zigzag(i);
        let ctx = KtModel::context(z, step);
        let cost = model.code(ctx, (zig < ESCAPE - 1).then_some(zig));
        let y = a * y_prev + beta * (i as f64 * step - z);
        if k >= skip {
            entropy_bits.push(cost);
            prefix_bits += len as u64;
        }
        indices.push(i);
        reconstruction.push(y);
        inputs.push(u);
        noise.push(i as f64 * step - z - u);
        y_prev = y;
    }
    let payload_bits = w.bit_len();
    bitstream.extend_from_slice(&w.into_bytes());

    let counted = (n - skip).max(1) as f64;
    let mse = compensated_sum(x[skip..].iter().zip(&reconstruction[skip..]).map(|(a, b)| (a - b) * (a - b))) / counted;
    let (error_variance, error_autocorr, error_input_corr) = noise_moments(&noise[skip..], &inputs[skip..]);
    let stats = BitstreamStats {
        samples: n,
        skipped: skip,
        mse,
        entropy_rate_bits: compensated_sum(entropy_bits) / counted,
        prefix_rate_bits: prefix_bits as f64 / counted,
        error_variance,
        error_autocorr,
        error_input_corr,
        payload_bits,
    };
    Ok(Encoded {
        indices,
        bitstream,
        reconstruction,
        inputs,
        noise,
        stats,
    })
}

/// Variance, lag-1..8 autocorrelation and input correlation of the noise.
pub(crate) fn noise_moments(noise: &[f64], inputs: &[f64]) -> (f64, Vec<f64>, f64) {
    let n = noise.len();
    if n < 2 {
        return (0.0, vec![0.0; 8], 0.0);
    }
    let mean = |v: &[f64]| compensated_sum(v.iter().copied()) / v.len() as f64;
    let (mq, mu) = (mean(noise), mean(inputs));
    let var_q = compensated_sum(noise.iter().map(|q| (q - mq) * (q - mq))) / n as f64;
    let var_u = compensated_sum(inputs.iter().map(|u| (u - mu) * (u - mu))) / n as f64;
    let acf = (1..=8)
        .map(|lag| {
            if lag >= n {
                return 0.0;
            }
            let c = compensated_sum((lag..n).map(|k| (noise[k] - mq) * (noise[k - lag] - mq))) / n as f64;
            c / var_q
        })
        .collect();
    let cov = compensated_sum(noise.iter().zip(inputs).map(|(q, u)| (q - mq) * (u - mu))) / n as f64;
    let corr = if var_u > 0.0 { cov / (var_q * var_u).sqrt() } else { 0.0 };
    (var_q, acf, corr)
}

/// Sample-by-sample decoder: `y(k)` is produced from the bits of sample `k`
/// and the shared dither sequence only.
#[derive(Debug, Clone)]
pub struct StreamDecoder<'a> {
    cfg: CoderConfig,
    reader: BitReader<'a>,
    dither_rng: ChaCha8Rng,
    y_prev: f64,
    decoded: usize,
    samples: usize,
}

impl<'a> StreamDecoder<'a> {
    pub fn new(bytes: &'a [u8], cfg: &CoderConfig) -> Result<Self> {
        cfg.validate()?;
        if bytes.len() < HEADER_LEN {
            return Err(Error::Bitstream(format!("header needs {HEADER_LEN} bytes, got {}", bytes.len())));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Bitstream("bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::Bitstream(format!("unsupported version {version}")));
        }
        let n = le_u64(&bytes[8..16]);
        let stream = le_u64(&bytes[40..48]);
        let decoder = config_checksum(cfg, n);
        if stream != decoder {
            return Err(Error::ChecksumMismatch { stream, decoder });
        }
        Ok(StreamDecoder {
            cfg: *cfg,
            reader: BitReader::new(&bytes[HEADER_LEN..]),
            dither_rng: ChaCha8Rng::seed_from_u64(cfg.dither_seed),
            y_prev: 0.0,
            decoded: 0,
            samples: usize::try_from(n).map_err(|_| Error::Bitstream("sample count overflows".into()))?,
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Next reconstruction, `None` after the last sample.
    pub fn next_sample(&mut self) -> Result<Option<f64>> {
        if self.decoded == self.samples {
            return Ok(None);
        }
        let i = read_index(&mut self.reader).ok_or(Error::Truncated { sample: self.decoded })?;
        let u: f64 = self.dither_rng.random();
        let z = self.cfg.step / 2.0 - self.cfg.step * u;
        let y = self.cfg.predictor * self.y_prev + self.cfg.scaling * (i as f64 * self.cfg.step - z);
        self.y_prev = y;
        self.decoded += 1;
        Ok(Some(y))
    }
}

pub fn decode(bytes: &[u8], cfg: &CoderConfig) -> Result<Vec<f64>> {
    let mut d = StreamDecoder::new(bytes, cfg)?;
    let mut out = Vec::with_capacity(d.samples());
    while let Some(y) = d.next_sample()? {
        out.push(y);
    }
    Ok(out)
}
