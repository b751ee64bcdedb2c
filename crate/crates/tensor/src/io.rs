//! Tensor file format: magic bytes "GZT1", u32 rank, u32 extents each,
//! then little-endian 32-bit floats row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, TensorError};
use crate::tensor::{Element, Tensor};

pub const MAGIC: &[u8; 4] = b"GZT1";

pub fn write_tensor<T: Element, W: Write>(t: &Tensor<T>, out: &mut W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(t.shape().len() as u32).to_le_bytes())?;
    for &ext in t.shape() {
        out.write_all(&(ext as u32).to_le_bytes())?;
    }
    for &v in t.data() {
        out.write_all(&(v.to_f64() as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor<R: Read>(input: &mut R) -> Result<Tensor<f32>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TensorError::Format(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let rank = read_u32(input)? as usize;
    if rank > 8 {
        return Err(TensorError::Format(format!("implausible rank {rank}")));
    }
    let mut shape = Vec::with_capacity(rank);
    for _ in 0..rank {
        shape.push(read_u32(input)? as usize);
    }
    let numel: usize = shape.iter().product();
    let mut data = Vec::with_capacity(numel);
    let mut buf = [0u8; 4];
    for _ in 0..numel {
        input.read_exact(&mut buf)?;
        data.push(f32::from_le_bytes(buf));
    }
    Tensor::new(shape, data)
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn save_tensor<T: Element>(t: &Tensor<T>, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(t, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_tensor(path: &Path) -> Result<Tensor<f32>> {
    let mut r = BufReader::new(File::open(path)?);
    read_tensor(&mut r)
}
