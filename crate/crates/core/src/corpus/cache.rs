//! Binary dataset cache.
//!
//! Layout (all integers little-endian): magic `TCDS`, u32 version, u32
//! schema-JSON length + bytes, u64 example count, then per example
//! `{u32 id_len, id, u32 text_len, text, labels}` where labels is a u8 tag
//! (0=single, 1=multi, 2=per-topic) followed by its payload.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::{Corpus, LabeledExample, Labels, TaskSchema};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TCDS";
const VERSION: u32 = 1;

pub fn save_cache(corpus: &Corpus, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let schema = serde_json::to_vec(corpus.schema())?;
    w.write_all(&(schema.len() as u32).to_le_bytes())?;
    w.write_all(&schema)?;
    w.write_all(&(corpus.len() as u64).to_le_bytes())?;
    for ex in corpus.examples() {
        write_str(&mut w, &ex.id)?;
        write_str(&mut w, &ex.text)?;
        match &ex.labels {
            Labels::Single(c) => {
                w.write_all(&[0u8])?;
                w.write_all(&(*c as u32).to_le_bytes())?;
            }
            Labels::Multi(v) => {
                w.write_all(&[1u8])?;
                w.write_all(&(v.len() as u32).to_le_bytes())?;
                for &b in v {
                    w.write_all(&[u8::from(b)])?;
                }
            }
            Labels::PerTopic(v) => {
                w.write_all(&[2u8])?;
                w.write_all(&(v.len() as u32).to_le_bytes())?;
                for &c in v {
                    w.write_all(&(c as u32).to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_cache(path: &Path) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::BadBundle(format!(
            "{} is not a dataset cache",
            path.display()
        )));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(Error::BadBundle(format!(
            "unsupported dataset cache version {version}"
        )));
    }
    let schema_len = read_u32(&mut r)? as usize;
    let mut schema_buf = vec![0u8; schema_len];
    r.read_exact(&mut schema_buf)?;
    let schema: TaskSchema = serde_json::from_slice(&schema_buf)?;
    let n = read_u64(&mut r)? as usize;
    let mut examples = Vec::with_capacity(n);
    for _ in 0..n {
        let id = read_str(&mut r)?;
        let text = read_str(&mut r)?;
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let labels = match tag[0] {
            0 => Labels::Single(read_u32(&mut r)? as usize),
            1 => {
                let k = read_u32(&mut r)? as usize;
                let mut bits = vec![0u8; k];
                r.read_exact(&mut bits)?;
                Labels::Multi(bits.into_iter().map(|b| b != 0).collect())
            }
            2 => {
                let k = read_u32(&mut r)? as usize;
                let mut v = Vec::with_capacity(k);
                for _ in 0..k {
                    v.push(read_u32(&mut r)? as usize);
                }
                Labels::PerTopic(v)
            }
            t => return Err(Error::BadBundle(format!("unknown label tag {t}"))),
        };
        examples.push(LabeledExample { id, text, labels });
    }
    Corpus::new(schema, examples)
}

fn write_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::BadBundle(format!("invalid utf-8: {e}")))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
