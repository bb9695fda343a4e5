/// MSB-first bit packing.
#[derive(Debug, Default, Clone)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    used: u8,
    len: u64,
}

impl BitWriter {
    pub fn push(&mut self, bit: bool) {
        if self.used == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().expect("byte allocated") |= 0x80 >> self.used;
        }
        self.used = (self.used + 1) % 8;
        self.len += 1;
    }

    pub fn push_bits(&mut self, value: u64, width: u32) {
        for b in (0..width).rev() {
            self.push((value >> b) & 1 == 1);
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.len
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        BitReader { bytes, pos: 0 }
    }

    pub fn bit(&mut self) -> Option<bool> {
        let byte = *self.bytes.get((self.pos / 8) as usize)?;
        let bit = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Some(bit)
    }

    pub fn bits(&mut self, width: u32) -> Option<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.bit()? as u64;
        }
        Some(v)
    }
}

/// Elias-gamma codeword length for `v >= 1`.
pub(crate) fn gamma_len(v: u64) -> u32 {
    2 * (63 - v.leading_zeros()) + 1
}

pub(crate) fn write_gamma(w: &mut BitWriter, v: u64) {
    debug_assert!(v >= 1);
    let l = 63 - v.leading_zeros();
    w.push_bits(0, l);
    w.push_bits(v, l + 1);
}

pub(crate) fn read_gamma(r: &mut BitReader<'_>) -> Option<u64> {
    let mut zeros = 0;
    while !r.bit()? {
        zeros += 1;
        if zeros > 63 {
            return None;
        }
    }
    let rest = r.bits(zeros)?;
    Some((1u64 << zeros) | rest)
}

pub(crate) fn zigzag(i: i64) -> u64 {
    ((i << 1) ^ (i >> 63)) as u64
}

pub(crate) fn unzigzag(z: u64) -> i64 {
    ((z >> 1) as i64) ^ -((z & 1) as i64)
}
