use super::realization::{Realization, UserClass};

const B: u8 = 1;
const W: u8 = 2;
const DUAL: u8 = 4;

/// Set statistics of one realization.
///
/// `j = |D_1|`, `y = |D_B|`, `k_b = |D_B \ D_W|`, `k_w = |D_W \ D_B|`,
/// `k_1 = |D_1 \ D_2|`, `k_2 = |D_2 \ D_1|`, `z = min(k_b, k_w)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct OutcomeTally {
    pub j: u32,
    pub y: u32,
    pub k_b: u32,
    pub k_w: u32,
    pub k_1: u32,
    pub k_2: u32,
    pub z: u32,
}

/// Per-file request flags (bit 0: B-only users, bit 1: W-only, bit 2: dual).
pub(crate) fn request_flags(realization: &Realization, flags: &mut Vec<u8>) {
    flags.clear();
    flags.resize(realization.n_files() as usize, 0);
    for req in realization.requests() {
        flags[req.file as usize] |= match req.class {
            UserClass::BOnly => B,
            UserClass::WOnly => W,
            UserClass::Both => DUAL,
        };
    }
}

pub(crate) fn requested_at_b(flag: u8) -> bool {
    flag & B != 0
}

pub(crate) fn requested_at_w(flag: u8) -> bool {
    flag & W != 0
}

pub(crate) fn requested_by_dual(flag: u8) -> bool {
    flag & DUAL != 0
}

pub(crate) fn tally_flags(flags: &[u8]) -> OutcomeTally {
    let mut t = OutcomeTally::default();
    for &f in flags {
        let single = f & (B | W) != 0;
        t.j += single as u32;
        t.y += (f & B != 0) as u32;
        t.k_b += (f & (B | W) == B) as u32;
        t.k_w += (f & (B | W) == W) as u32;
        t.k_1 += (single && f & DUAL == 0) as u32;
        t.k_2 += (f == DUAL) as u32;
    }
    t.z = t.k_b.min(t.k_w);
    t
}

pub fn tally(realization: &Realization) -> OutcomeTally {
    let mut flags = Vec::new();
    request_flags(realization, &mut flags);
    tally_flags(&flags)
}
