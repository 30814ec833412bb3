//! Delivery phase.
//!
//! [`plan_delivery`] re-enacts the protocol at packet level and returns every
//! backhaul transmission. [`count_backhaul_mds`] and [`count_backhaul_ecc`]
//! give the closed counting identities in terms of an [`OutcomeTally`];
//! [`FastCounter`] reproduces the packet count of the plan from per-file set
//! sizes and is what the Monte-Carlo loop runs.

use std::fmt;

use fixedbitset::FixedBitSet;

use super::placement::PlacementMap;
use super::realization::Realization;
use super::tally::{request_flags, requested_at_b, requested_at_w, requested_by_dual, OutcomeTally};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, Scheme};

/// Fragment (ECC) or code symbol (MDS) `index` of `file`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PieceId {
    pub file: u32,
    pub index: u32,
}

impl fmt::Display for PieceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}^({})", self.file + 1, self.index + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Packet {
    /// MDS code symbol multicast to both relays.
    Encoded(PieceId),
    /// Uncoded ECC fragment multicast to both relays.
    Plain(PieceId),
    /// XOR of a fragment wanted at relay W (cached at B) and a fragment
    /// wanted at relay B (cached at W).
    Coded { for_w: PieceId, for_b: PieceId },
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Packet::Encoded(p) | Packet::Plain(p) => write!(f, "{p}"),
            Packet::Coded { for_w, for_b } => write!(f, "{for_w} ⊕ {for_b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeliveryPlan {
    pub packets: Vec<Packet>,
}

impl DeliveryPlan {
    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn coded(&self) -> usize {
        self.packets.iter().filter(|p| matches!(p, Packet::Coded { .. })).count()
    }

    /// Replays the plan at both relays and checks every user ends with a
    /// decodable file: all `n_F` fragments (ECC) or `n_F` distinct code
    /// symbols (MDS).
    pub fn verify(&self, realization: &Realization, placement: &PlacementMap) -> Result<(), String> {
        let n = realization.n_files() as usize;
        let universe = 4 * placement.n_fragments() as usize;
        let mut heard = vec![FixedBitSet::with_capacity(universe); n];
        let mut at_b: Vec<FixedBitSet> = (0..n as u32).map(|f| grown(placement.relay_b(f), universe)).collect();
        let mut at_w: Vec<FixedBitSet> = (0..n as u32).map(|f| grown(placement.relay_w(f), universe)).collect();
        for packet in &self.packets {
            match *packet {
                Packet::Encoded(p) | Packet::Plain(p) => heard[p.file as usize].insert(p.index as usize),
                Packet::Coded { for_w, for_b } => {
                    if !at_b[for_w.file as usize].contains(for_w.index as usize) {
                        return Err(format!("relay B cannot strip {for_w} from {packet}"));
                    }
                    if !at_w[for_b.file as usize].contains(for_b.index as usize) {
                        return Err(format!("relay W cannot strip {for_b} from {packet}"));
                    }
                    at_b[for_b.file as usize].insert(for_b.index as usize);
                    at_w[for_w.file as usize].insert(for_w.index as usize);
                }
            }
        }
        for f in 0..n {
            at_b[f].union_with(&heard[f]);
            at_w[f].union_with(&heard[f]);
        }
        let need = placement.n_fragments() as usize;
        let decodable = |set: &FixedBitSet| match placement.scheme() {
            Scheme::Mds => set.count_ones(..) >= need,
            Scheme::Ecc => set.count_ones(..need) == need,
        };
        let mut flags = Vec::new();
        request_flags(realization, &mut flags);
        for (f, &flag) in flags.iter().enumerate() {
            if requested_at_b(flag) && !decodable(&at_b[f]) {
                return Err(format!("relay B cannot decode file {}", f + 1));
            }
            if requested_at_w(flag) && !decodable(&at_w[f]) {
                return Err(format!("relay W cannot decode file {}", f + 1));
            }
            if requested_by_dual(flag) {
                let mut both = at_b[f].clone();
                both.union_with(&at_w[f]);
                if !decodable(&both) {
                    return Err(format!("dual user cannot decode file {}", f + 1));
                }
            }
        }
        Ok(())
    }
}

fn grown(set: &FixedBitSet, len: usize) -> FixedBitSet {
    let mut s = set.clone();
    s.grow(len);
    s
}

fn check_match(realization: &Realization, placement: &PlacementMap) -> Result<()> {
    if realization.n_files() != placement.n_files() {
        return Err(Error::PlacementMismatch(format!(
            "realization over {} files, placement over {}",
            realization.n_files(),
            placement.n_files()
        )));
    }
    Ok(())
}

/// Packet-level delivery for one realization.
pub fn plan_delivery(realization: &Realization, placement: &PlacementMap) -> Result<DeliveryPlan> {
    check_match(realization, placement)?;
    let mut flags = Vec::new();
    request_flags(realization, &mut flags);
    Ok(match placement.scheme() {
        Scheme::Mds => plan_mds(&flags, placement),
        Scheme::Ecc => plan_ecc(&flags, placement),
    })
}

/// Number of backhaul transmissions of [`plan_delivery`].
pub fn simulate_protocol(realization: &Realization, placement: &PlacementMap) -> Result<u64> {
    Ok(plan_delivery(realization, placement)?.len() as u64)
}

// Each requested file gets fresh code symbols, indices from 2 F_f on, enough
// for its neediest requester; the multicast serves every requester at once.
fn plan_mds(flags: &[u8], placement: &PlacementMap) -> DeliveryPlan {
    let n_f = placement.n_fragments() as usize;
    let mut packets = Vec::new();
    for (f, &flag) in flags.iter().enumerate() {
        let b = placement.relay_b(f as u32);
        let w = placement.relay_w(f as u32);
        let mut need = 0usize;
        if requested_at_b(flag) {
            need = need.max(n_f.saturating_sub(b.count_ones(..)));
        }
        if requested_at_w(flag) {
            need = need.max(n_f.saturating_sub(w.count_ones(..)));
        }
        if requested_by_dual(flag) {
            need = need.max(n_f.saturating_sub(b.union_count(w)));
        }
        let fresh = 2 * placement.fragments_per_file()[f] as usize;
        packets.extend((0..need).map(|i| Packet::Encoded(PieceId { file: f as u32, index: (fresh + i) as u32 })));
    }
    DeliveryPlan { packets }
}

fn plan_ecc(flags: &[u8], placement: &PlacementMap) -> DeliveryPlan {
    let n_f = placement.n_fragments() as usize;
    let n = flags.len();
    let mut full = FixedBitSet::with_capacity(n_f);
    full.insert_range(..);

    // stage 1 leaves each relay missing whatever its cache lacks
    let mut need_b = vec![FixedBitSet::with_capacity(n_f); n];
    let mut need_w = vec![FixedBitSet::with_capacity(n_f); n];
    let mut need_dual = vec![FixedBitSet::with_capacity(n_f); n];
    for (f, &flag) in flags.iter().enumerate() {
        let cb = placement.relay_b(f as u32);
        let cw = placement.relay_w(f as u32);
        if requested_at_b(flag) {
            need_b[f] = full.difference(cb).collect();
            need_b[f].grow(n_f);
        }
        if requested_at_w(flag) {
            need_w[f] = full.difference(cw).collect();
            need_w[f].grow(n_f);
        }
        if requested_by_dual(flag) && !requested_at_b(flag) && !requested_at_w(flag) {
            let mut cached = cb.clone();
            cached.union_with(cw);
            need_dual[f] = full.difference(&cached).collect();
            need_dual[f].grow(n_f);
        }
    }

    // stage 2: pair fragments B lacks but W holds with fragments W lacks but
    // B holds, in (file, index) order
    let wanted_b: Vec<PieceId> = (0..n)
        .flat_map(|f| {
            need_b[f]
                .intersection(placement.relay_w(f as u32))
                .map(move |i| PieceId { file: f as u32, index: i as u32 })
                .collect::<Vec<_>>()
        })
        .collect();
    let wanted_w: Vec<PieceId> = (0..n)
        .flat_map(|f| {
            need_w[f]
                .intersection(placement.relay_b(f as u32))
                .map(move |i| PieceId { file: f as u32, index: i as u32 })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut packets = Vec::new();
    for (&for_b, &for_w) in wanted_b.iter().zip(&wanted_w) {
        need_b[for_b.file as usize].set(for_b.index as usize, false);
        need_w[for_w.file as usize].set(for_w.index as usize, false);
        packets.push(Packet::Coded { for_w, for_b });
    }

    // stage 3: everything still missing goes out uncoded, once per fragment
    for f in 0..n {
        let mut rest = need_b[f].clone();
        rest.union_with(&need_w[f]);
        rest.union_with(&need_dual[f]);
        packets.extend(rest.ones().map(|i| Packet::Plain(PieceId { file: f as u32, index: i as u32 })));
    }
    DeliveryPlan { packets }
}

/// `(n_F - F) j + (n_F - 2F)^+ k_2` with `F = M n_F / N`.
pub fn count_backhaul_mds(tally: &OutcomeTally, scenario: &Scenario) -> Result<u64> {
    let n_f = scenario.n_fragments() as i64;
    let f = scenario.uniform_fragments_per_file()? as i64;
    let count = (n_f - f) * tally.j as i64 + (n_f - 2 * f).max(0) * tally.k_2 as i64;
    Ok(count as u64)
}

/// `(n_F - F)(y + k_w) - omega_1 z + (n_F - 2F)^+ k_2` with
/// `omega_1 = min(F, n_F - F)`.
pub fn count_backhaul_ecc(tally: &OutcomeTally, scenario: &Scenario) -> Result<u64> {
    let n_f = scenario.n_fragments() as i64;
    let f = scenario.uniform_fragments_per_file()? as i64;
    let omega = f.min(n_f - f);
    let count =
        (n_f - f) * (tally.y + tally.k_w) as i64 - omega * tally.z as i64 + (n_f - 2 * f).max(0) * tally.k_2 as i64;
    debug_assert!(count >= 0);
    Ok(count as u64)
}

pub fn count_backhaul(tally: &OutcomeTally, scenario: &Scenario, scheme: Scheme) -> Result<u64> {
    match scheme {
        Scheme::Mds => count_backhaul_mds(tally, scenario),
        Scheme::Ecc => count_backhaul_ecc(tally, scenario),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct FileProfile {
    // fragments missing at B, at W, at both, and from both caches together
    miss_b: u32,
    miss_w: u32,
    miss_either: u32,
    miss_union: u32,
    // fragments W can supply to B and B to W
    w_gives_b: u32,
    b_gives_w: u32,
}

/// Packet counts of [`plan_delivery`] from precomputed per-file set sizes.
#[derive(Debug, Clone)]
pub struct FastCounter {
    scheme: Scheme,
    files: Vec<FileProfile>,
    flags: Vec<u8>,
}

impl FastCounter {
    pub fn new(placement: &PlacementMap) -> Self {
        let n_f = placement.n_fragments();
        let files = (0..placement.n_files())
            .map(|f| {
                let b = placement.relay_b(f);
                let w = placement.relay_w(f);
                let cb = b.count_ones(..) as u32;
                let cw = w.count_ones(..) as u32;
                let inter = b.intersection_count(w) as u32;
                FileProfile {
                    miss_b: n_f.saturating_sub(cb),
                    miss_w: n_f.saturating_sub(cw),
                    miss_either: n_f - inter.min(n_f),
                    miss_union: n_f.saturating_sub(b.union_count(w) as u32),
                    w_gives_b: cw - inter,
                    b_gives_w: cb - inter,
                }
            })
            .collect();
        Self { scheme: placement.scheme(), files, flags: Vec::new() }
    }

    pub fn count(&mut self, realization: &Realization) -> u64 {
        let mut flags = std::mem::take(&mut self.flags);
        request_flags(realization, &mut flags);
        let c = self.count_flags(&flags);
        self.flags = flags;
        c
    }

    pub(crate) fn count_flags(&self, flags: &[u8]) -> u64 {
        let mut total = 0u64;
        match self.scheme {
            Scheme::Mds => {
                for (p, &flag) in self.files.iter().zip(flags) {
                    let mut need = 0;
                    if requested_at_b(flag) {
                        need = need.max(p.miss_b);
                    }
                    if requested_at_w(flag) {
                        need = need.max(p.miss_w);
                    }
                    if requested_by_dual(flag) {
                        need = need.max(p.miss_union);
                    }
                    total += need as u64;
                }
            }
            Scheme::Ecc => {
                let (mut to_b, mut to_w) = (0u64, 0u64);
                for (p, &flag) in self.files.iter().zip(flags) {
                    let (b, w) = (requested_at_b(flag), requested_at_w(flag));
                    total += match (b, w) {
                        (true, true) => p.miss_either,
                        (true, false) => p.miss_b,
                        (false, true) => p.miss_w,
                        (false, false) if requested_by_dual(flag) => p.miss_union,
                        _ => 0,
                    } as u64;
                    if b {
                        to_b += p.w_gives_b as u64;
                    }
                    if w {
                        to_w += p.b_gives_w as u64;
                    }
                }
                // each coded packet stands in for two uncoded ones
                total -= to_b.min(to_w);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::occupancy::Population;
    use crate::scenario::Popularity;
    use crate::simulator::placement::{place_popularity, place_uniform};
    use crate::simulator::realization::sample_realization;
    use crate::simulator::rng::trial_rng;
    use crate::simulator::tally::tally;

    fn two_files() -> Scenario {
        Scenario::uniform(2, 1, 1, 1, 0).unwrap()
    }

    #[test]
    fn ecc_different_files_single_xor() {
        let s = two_files();
        let placement = place_uniform(&s, Scheme::Ecc).unwrap();
        let r = Realization::new(2, &[0], &[1], &[]).unwrap();
        let plan = plan_delivery(&r, &placement).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.packets[0].to_string(), "f2^(1) ⊕ f1^(2)");
        plan.verify(&r, &placement).unwrap();
    }

    #[test]
    fn ecc_same_file_single_xor() {
        let s = two_files();
        let placement = place_uniform(&s, Scheme::Ecc).unwrap();
        let r = Realization::new(2, &[0], &[0], &[]).unwrap();
        let plan = plan_delivery(&r, &placement).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.coded(), 1);
        plan.verify(&r, &placement).unwrap();
    }

    #[test]
    fn mds_two_file_cases() {
        let s = two_files();
        let placement = place_uniform(&s, Scheme::Mds).unwrap();
        let same = Realization::new(2, &[1], &[1], &[]).unwrap();
        let plan = plan_delivery(&same, &placement).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.packets[0].to_string(), "f2^(3)");
        plan.verify(&same, &placement).unwrap();
        let apart = Realization::new(2, &[0], &[1], &[]).unwrap();
        assert_eq!(simulate_protocol(&apart, &placement).unwrap(), 2);
    }

    #[test]
    fn counting_identities_on_two_file_cases() {
        let s = two_files();
        let same = OutcomeTally { j: 1, y: 1, k_b: 0, k_w: 0, k_1: 1, k_2: 0, z: 0 };
        let apart = OutcomeTally { j: 2, y: 1, k_b: 1, k_w: 1, k_1: 2, k_2: 0, z: 1 };
        assert_eq!(count_backhaul_mds(&same, &s).unwrap(), 1);
        assert_eq!(count_backhaul_mds(&apart, &s).unwrap(), 2);
        assert_eq!(count_backhaul_ecc(&apart, &s).unwrap(), 1);
        assert_eq!(count_backhaul_ecc(&same, &s).unwrap(), 1);
    }

    #[test]
    fn full_cache_sends_nothing() {
        let s = Scenario::uniform(5, 5, 2, 2, 2).unwrap();
        let t = OutcomeTally { j: 3, y: 2, k_b: 1, k_w: 1, k_1: 2, k_2: 2, z: 1 };
        assert_eq!(count_backhaul_mds(&t, &s).unwrap(), 0);
        assert_eq!(count_backhaul_ecc(&t, &s).unwrap(), 0);
    }

    #[test]
    fn empty_cache_sends_whole_files() {
        let s = Scenario::uniform(6, 0, 3, 3, 3).unwrap();
        for scheme in Scheme::ALL {
            let placement = place_uniform(&s, scheme).unwrap();
            for trial in 0..50 {
                let r = sample_realization(&s, &mut trial_rng(1, trial)).unwrap();
                let t = tally(&r);
                let expect = 6 * (t.j + t.k_2) as u64;
                assert_eq!(simulate_protocol(&r, &placement).unwrap(), expect);
                assert_eq!(count_backhaul_mds(&t, &s).unwrap(), count_backhaul_ecc(&t, &s).unwrap());
            }
        }
    }

    #[test]
    fn protocol_matches_identities_and_fast_counter() {
        for m in 0..=6 {
            let s = Scenario::uniform(6, m, 3, 2, 2).unwrap();
            for scheme in Scheme::ALL {
                let placement = place_uniform(&s, scheme).unwrap();
                let mut fast = FastCounter::new(&placement);
                for trial in 0..200 {
                    let r = sample_realization(&s, &mut trial_rng(m as u64, trial)).unwrap();
                    let plan = plan_delivery(&r, &placement).unwrap();
                    plan.verify(&r, &placement).unwrap();
                    let t = tally(&r);
                    assert_eq!(plan.len() as u64, count_backhaul(&t, &s, scheme).unwrap());
                    assert_eq!(plan.len() as u64, fast.count(&r));
                }
            }
        }
    }

    #[test]
    fn zipf_placement_plans_decode_and_fast_counter_agrees() {
        let pop = Population::new(8, 3, 3, 2).unwrap();
        for m in [0, 2, 3, 5, 8] {
            let s = Scenario::new(pop, 8, m, Popularity::Zipf { alpha: 1.2 }).unwrap();
            let mut ecc_total = 0;
            let mut mds_total = 0;
            for scheme in Scheme::ALL {
                let placement = place_popularity(&s, scheme).unwrap();
                let mut fast = FastCounter::new(&placement);
                for trial in 0..200 {
                    let r = sample_realization(&s, &mut trial_rng(42, trial)).unwrap();
                    let plan = plan_delivery(&r, &placement).unwrap();
                    plan.verify(&r, &placement).unwrap();
                    assert_eq!(plan.len() as u64, fast.count(&r));
                    match scheme {
                        Scheme::Mds => mds_total += plan.len(),
                        Scheme::Ecc => ecc_total += plan.len(),
                    }
                }
            }
            assert!(ecc_total <= mds_total);
        }
    }

    #[test]
    fn general_fragment_count() {
        let pop = Population::new(4, 2, 2, 1).unwrap();
        let s = Scenario::new(pop, 8, 1, Popularity::Uniform).unwrap();
        for scheme in Scheme::ALL {
            let placement = place_uniform(&s, scheme).unwrap();
            for trial in 0..100 {
                let r = sample_realization(&s, &mut trial_rng(8, trial)).unwrap();
                let t = tally(&r);
                assert_eq!(simulate_protocol(&r, &placement).unwrap(), count_backhaul(&t, &s, scheme).unwrap());
            }
        }
    }

    #[test]
    fn mismatched_placement_rejected() {
        let placement = place_uniform(&two_files(), Scheme::Ecc).unwrap();
        let r = Realization::new(3, &[0], &[], &[]).unwrap();
        assert!(matches!(plan_delivery(&r, &placement), Err(Error::PlacementMismatch(_))));
    }
}
