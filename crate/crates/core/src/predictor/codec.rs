//! Binary model container, all integers and floats little-endian:
//!
//! ```text
//! "LVLSCOPE1"            9 bytes
//! backbone tag           u8   (0 bilinear, 1 conv)
//! window length T        u64
//! seed                   u64
//! tensor count           u32
//! per tensor:
//!   name length          u32, then UTF-8 name bytes
//!   rows, cols           u64, u64
//!   values               rows*cols f64, row-major
//! ```

use std::path::Path;

use super::{BackboneKind, ModelParams, NamedTensor};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 9] = b"LVLSCOPE1";

pub fn encode_params(params: &ModelParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 8 * params.num_values());
    out.extend_from_slice(MAGIC);
    out.push(params.kind.code());
    out.extend_from_slice(&(params.window_length as u64).to_le_bytes());
    out.extend_from_slice(&params.seed.to_le_bytes());
    out.extend_from_slice(&(params.tensors().len() as u32).to_le_bytes());
    for t in params.tensors() {
        out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
        out.extend_from_slice(t.name.as_bytes());
        out.extend_from_slice(&(t.value.rows() as u64).to_le_bytes());
        out.extend_from_slice(&(t.value.cols() as u64).to_le_bytes());
        for v in t.value.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode_params(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let code = r.take(1)?[0];
    let kind = BackboneKind::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown backbone tag {code}")))?;
    let window_length = r.u64()? as usize;
    let seed = r.u64()?;
    let count = r.u32()? as usize;
    let mut tensors = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::Format("tensor name is not UTF-8".into()))?
            .to_string();
        let rows = r.u64()? as usize;
        let cols = r.u64()? as usize;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("tensor size overflow".into()))?;
        let raw = r.take(n.checked_mul(8).ok_or_else(|| Error::Format("tensor size overflow".into()))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(NamedTensor {
            name,
            value: Matrix::from_vec(rows, cols, data)?,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    ModelParams::from_parts(kind, window_length, seed, tensors)
}

pub fn save_params(path: &Path, params: &ModelParams) -> Result<()> {
    crate::experiment::write_atomic(path, &encode_params(params))
}

pub fn load_params(path: &Path) -> Result<ModelParams> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_params(&bytes)
}
