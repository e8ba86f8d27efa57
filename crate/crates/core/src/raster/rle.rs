//! Uncompressed row-major run-length encoding. Runs alternate background /
//! foreground and always start with a (possibly zero) background run.

use super::BinaryMask;
use crate::error::{Error, Result};

pub fn encode_rle(mask: &BinaryMask) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u32;
    for &v in mask.pixels() {
        if v == current {
            len += 1;
        } else {
            runs.push(len);
            current = v;
            len = 1;
        }
    }
    runs.push(len);
    runs
}

pub fn decode_rle(runs: &[u32], width: usize, height: usize) -> Result<BinaryMask> {
    let expected = width * height;
    let actual: usize = runs.iter().map(|&r| r as usize).sum();
    if actual != expected {
        return Err(Error::RleLength { expected, actual });
    }
    let mut pixels = Vec::with_capacity(expected);
    for (i, &run) in runs.iter().enumerate() {
        pixels.extend(std::iter::repeat_n(i % 2 == 1, run as usize));
    }
    BinaryMask::from_pixels(width, height, pixels)
}
