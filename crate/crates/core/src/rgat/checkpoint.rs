//! RGCK: named f32 tensors behind a versioned header.
//!
//! Layout (little-endian): `RGCK`, u16 version, u32 tensor count, then per
//! tensor a u16 name length, the UTF-8 name, u32 rows, u32 cols and
//! rows × cols f32 values in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::numcore::Tensor2;

const MAGIC: &[u8; 4] = b"RGCK";
const VERSION: u16 = 1;

/// Values are held at f32 precision: inserting rounds, so what is in memory
/// is exactly what a reload produces.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    tensors: IndexMap<String, Tensor2>,
}

impl Checkpoint {
    pub fn new() -> Self {
        Checkpoint::default()
    }

    pub fn insert(&mut self, name: &str, t: &Tensor2) -> Result<()> {
        if self.tensors.contains_key(name) {
            return Err(Error::Duplicate(format!("tensor {name} already in checkpoint")));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite(format!("tensor {name}")));
        }
        self.tensors.insert(name.to_string(), t.round_to_f32());
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Tensor2> {
        self.tensors.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&Tensor2> {
        self.get(name).ok_or_else(|| Error::Format(format!("checkpoint lacks tensor {name}")))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor2)> {
        self.tensors.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u32::<LittleEndian>(self.tensors.len() as u32)?;
        for (name, t) in &self.tensors {
            let len = u16::try_from(name.len()).map_err(|_| Error::Format(format!("tensor name too long: {name}")))?;
            w.write_u16::<LittleEndian>(len)?;
            w.write_all(name.as_bytes())?;
            w.write_u32::<LittleEndian>(t.rows() as u32)?;
            w.write_u32::<LittleEndian>(t.cols() as u32)?;
            for v in t.data() {
                w.write_f32::<LittleEndian>(*v as f32)?;
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| Error::Format("file too short for RGCK header".into()))?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}, expected RGCK")));
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported RGCK version {version}")));
        }
        let count = r.read_u32::<LittleEndian>()?;
        let mut ck = Checkpoint::new();
        for k in 0..count {
            let truncated = |_| Error::Format(format!("tensor {k} truncated"));
            let len = r.read_u16::<LittleEndian>().map_err(truncated)? as usize;
            let mut name = vec![0u8; len];
            r.read_exact(&mut name).map_err(truncated)?;
            let name = String::from_utf8(name).map_err(|_| Error::Format(format!("tensor {k}: name is not UTF-8")))?;
            let rows = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
            let cols = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
            let mut vals = vec![0f32; rows * cols];
            r.read_f32_into::<LittleEndian>(&mut vals).map_err(truncated)?;
            let t = Tensor2::new(rows, cols, vals.into_iter().map(f64::from).collect())?;
            ck.insert(&name, &t)?;
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Checkpoint::read(BufReader::new(File::open(path)?))
    }
}
