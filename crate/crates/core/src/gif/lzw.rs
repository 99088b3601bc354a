//! Variable-width LZW as used by GIF (LSB-first bit packing, 12-bit cap).

use std::collections::HashMap;

const MAX_CODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LzwError {
    /// Byte position in the concatenated code stream.
    pub position: usize,
    pub reason: &'static str,
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u32,
    bits: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        BitReader {
            data,
            pos: 0,
            acc: 0,
            bits: 0,
        }
    }

    fn read(&mut self, n: u32) -> Option<u16> {
        while self.bits < n {
            let b = *self.data.get(self.pos)?;
            self.pos += 1;
            self.acc |= (b as u32) << self.bits;
            self.bits += 8;
        }
        let v = (self.acc & ((1 << n) - 1)) as u16;
        self.acc >>= n;
        self.bits -= n;
        Some(v)
    }
}

/// Decodes an LZW code stream into at most `expected` color indices.
///
/// A stream that ends without an end-of-information code is accepted; the
/// caller decides what to do with a short pixel count.
pub(crate) fn decode(min_code_size: u8, data: &[u8], expected: usize) -> Result<Vec<u8>, LzwError> {
    if !(1..=11).contains(&min_code_size) {
        return Err(LzwError {
            position: 0,
            reason: "minimum code size out of range",
        });
    }
    let clear = 1u16 << min_code_size;
    let eoi = clear + 1;
    let mut prefix = vec![0u16; MAX_CODES];
    let mut suffix = vec![0u8; MAX_CODES];
    let mut first = vec![0u8; MAX_CODES];
    let mut length = vec![0u16; MAX_CODES];
    for c in 0..clear as usize {
        suffix[c] = c as u8;
        first[c] = c as u8;
        length[c] = 1;
    }

    let mut out = Vec::with_capacity(expected);
    let mut reader = BitReader::new(data);
    let mut size = min_code_size as u32 + 1;
    let mut next = eoi + 1;
    let mut prev: Option<u16> = None;

    let emit = |out: &mut Vec<u8>, code: u16, length: &[u16], suffix: &[u8], prefix: &[u16]| {
        let len = length[code as usize] as usize;
        let start = out.len();
        out.resize(start + len, 0);
        let mut c = code as usize;
        for i in (0..len).rev() {
            out[start + i] = suffix[c];
            c = prefix[c] as usize;
        }
    };

    while out.len() < expected {
        let Some(code) = reader.read(size) else { break };
        if code == clear {
            size = min_code_size as u32 + 1;
            next = eoi + 1;
            prev = None;
            continue;
        }
        if code == eoi {
            break;
        }
        let Some(p) = prev else {
            if code >= clear {
                return Err(LzwError {
                    position: reader.pos,
                    reason: "first code after clear is not a literal",
                });
            }
            out.push(code as u8);
            prev = Some(code);
            continue;
        };
        let head = if code < next {
            emit(&mut out, code, &length, &suffix, &prefix);
            first[code as usize]
        } else if code == next && (next as usize) < MAX_CODES {
            let f = first[p as usize];
            emit(&mut out, p, &length, &suffix, &prefix);
            out.push(f);
            f
        } else {
            return Err(LzwError {
                position: reader.pos,
                reason: "code not yet in table",
            });
        };
        if (next as usize) < MAX_CODES {
            let n = next as usize;
            prefix[n] = p;
            suffix[n] = head;
            first[n] = first[p as usize];
            length[n] = length[p as usize].saturating_add(1);
            next += 1;
            if next == (1 << size) && size < 12 {
                size += 1;
            }
        }
        prev = Some(code);
    }
    out.truncate(expected);
    Ok(out)
}

struct BitWriter {
    out: Vec<u8>,
    acc: u32,
    bits: u32,
}

impl BitWriter {
    fn write(&mut self, code: u16, size: u32) {
        self.acc |= (code as u32) << self.bits;
        self.bits += size;
        while self.bits >= 8 {
            self.out.push(self.acc as u8);
            self.acc >>= 8;
            self.bits -= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.bits > 0 {
            self.out.push(self.acc as u8);
        }
        self.out
    }
}

/// Encodes color indices (each `< 1 << min_code_size`) into an LZW code stream.
pub(crate) fn encode(min_code_size: u8, indices: &[u8]) -> Vec<u8> {
    assert!((2..=8).contains(&min_code_size));
    let clear = 1u16 << min_code_size;
    let eoi = clear + 1;
    let mut w = BitWriter {
        out: Vec::with_capacity(indices.len() / 2),
        acc: 0,
        bits: 0,
    };
    let mut size = min_code_size as u32 + 1;
    let mut next = eoi + 1;
    let mut dict: HashMap<(u16, u8), u16> = HashMap::new();

    w.write(clear, size);
    let Some((&head, rest)) = indices.split_first() else {
        w.write(eoi, size);
        return w.finish();
    };
    let mut current = head as u16;
    for &k in rest {
        if let Some(&c) = dict.get(&(current, k)) {
            current = c;
            continue;
        }
        w.write(current, size);
        if (next as usize) < MAX_CODES {
            dict.insert((current, k), next);
            next += 1;
            if next > (1 << size) && size < 12 {
                size += 1;
            }
        } else {
            w.write(clear, size);
            dict.clear();
            size = min_code_size as u32 + 1;
            next = eoi + 1;
        }
        current = k as u16;
    }
    w.write(current, size);
    w.write(eoi, size);
    w.finish()
}
