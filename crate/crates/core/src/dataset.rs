//! On-disk formats: the flat `key = value` config file and the `OB1T`
//! binary dataset container.
//!
//! Container layout (all integers little-endian):
//!
//! ```text
//! magic   b"OB1T"
//! version u32          (currently 1)
//! m, n, s u64 each
//! matrix  m*n f64, row-major
//! y       m i8, each -1 or +1
//! flips   m u8, 0 or 1
//! ```

use nalgebra::{DMatrix, DVector};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::model::{BinaryObservation, ProblemConfig};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"OB1T";
pub const VERSION: u32 = 1;

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Format(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", lineno + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub(crate) fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {key} = {value:?}")))
}

impl ProblemConfig {
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = ProblemConfig::new(0, 0, 0, 0.0, 0.0, 0.0);
        let mut seen = [false; 6];
        for (k, v) in parse_kv(text)? {
            match k.as_str() {
                "m" => (cfg.m, seen[0]) = (parse_value(&k, &v)?, true),
                "n" => (cfg.n, seen[1]) = (parse_value(&k, &v)?, true),
                "s" => (cfg.s, seen[2]) = (parse_value(&k, &v)?, true),
                "nu" => (cfg.nu, seen[3]) = (parse_value(&k, &v)?, true),
                "sigma" => (cfg.sigma, seen[4]) = (parse_value(&k, &v)?, true),
                "flip_prob" => (cfg.flip_prob, seen[5]) = (parse_value(&k, &v)?, true),
                "seed" => cfg.seed = parse_value(&k, &v)?,
                "signal" => cfg.signal = v.parse()?,
                other => return Err(Error::Format(format!("unknown config key {other:?}"))),
            }
        }
        let names = ["m", "n", "s", "nu", "sigma", "flip_prob"];
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Format(format!("missing config key {:?}", names[i])));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "m = {}\nn = {}\ns = {}\nnu = {}\nsigma = {}\nflip_prob = {}\nseed = {}\nsignal = {}\n",
            self.m, self.n, self.s, self.nu, self.sigma, self.flip_prob, self.seed, self.signal
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_kv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Contents of an `OB1T` container.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub s: usize,
    pub matrix: DMatrix<f64>,
    pub y: DVector<f64>,
    pub flip_mask: Vec<bool>,
}

impl Dataset {
    pub fn from_observation(s: usize, matrix: DMatrix<f64>, obs: &BinaryObservation) -> Self {
        Dataset {
            s,
            matrix,
            y: obs.y.clone(),
            flip_mask: obs.flip_mask.clone(),
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let (m, n) = self.matrix.shape();
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [m, n, self.s] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(m * n * 8 + 2 * m);
        for i in 0..m {
            for j in 0..n {
                buf.extend_from_slice(&self.matrix[(i, j)].to_le_bytes());
            }
        }
        buf.extend(self.y.iter().map(|&v| if v < 0.0 { -1i8 as u8 } else { 1u8 }));
        buf.extend(self.flip_mask.iter().map(|&f| f as u8));
        w.write_all(&buf)
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::Format(format!("read failed: {e}")))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let short = || Error::Format("truncated OB1T container".into());
        if bytes.len() < 32 {
            return Err(short());
        }
        if bytes[..4] != MAGIC {
            return Err(Error::Format("bad magic, expected OB1T".into()));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported container version {version}")));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap());
        let (m, n, s) = (word(0) as usize, word(1) as usize, word(2) as usize);
        let body = &bytes[32..];
        let matrix_len = m.checked_mul(n).and_then(|k| k.checked_mul(8)).ok_or_else(short)?;
        let expected = matrix_len.checked_add(2 * m).ok_or_else(short)?;
        if body.len() != expected {
            return Err(Error::Format(format!(
                "container body has {} bytes, expected {expected} for m={m}, n={n}",
                body.len()
            )));
        }
        let mut matrix = DMatrix::zeros(m, n);
        for (k, chunk) in body[..matrix_len].chunks_exact(8).enumerate() {
            matrix[(k / n, k % n)] = f64::from_le_bytes(chunk.try_into().unwrap());
        }
        let y_bytes = &body[matrix_len..matrix_len + m];
        let mut y = DVector::zeros(m);
        for (i, &b) in y_bytes.iter().enumerate() {
            y[i] = match b as i8 {
                1 => 1.0,
                -1 => -1.0,
                other => return Err(Error::Format(format!("y[{i}] = {other} is not +-1"))),
            };
        }
        let flip_mask = body[matrix_len + m..]
            .iter()
            .enumerate()
            .map(|(i, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Format(format!("flip_mask[{i}] = {other} is not 0/1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            s,
            matrix,
            y,
            flip_mask,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|e| Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}
