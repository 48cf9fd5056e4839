//! Secret sharing, simulated share transport, and the key-confirmation
//! exchange.
//!
//! The initiator splits a fresh secret `s = (s1, s2, s3)` into n-of-n XOR
//! shares and sends one share per path. The responder reconstructs
//! `s' = (s1', s2', s3')` and both sides confirm agreement with a
//! two-message exchange: the challenge carries a nonce and a digest of
//! `s3` one-time-padded with `s1`, the response returns a digest of the
//! nonce padded with `s2'`. On success both keep `s3` as the shared key.
//!
//! When shortfall forces fewer shares than planned, the realized share
//! count travels in clear with the first share's routing metadata; the
//! count itself is not integrity-protected, which is acceptable here
//! because a wrong count only yields a mismatched reconstruction that the
//! confirmation exchange rejects.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::adversary::CompromiseMask;
use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::graph::NodeId;

/// Bit lengths of the secret's three parts: `|s1| = r_len + h_len`,
/// `|s2| = h_len`, `|s3| = key_len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProtocolParams {
    pub r_len: usize,
    pub h_len: usize,
    pub key_len: usize,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        // 64-bit nonce and digest bound the undetected-tamper probability
        // by 2^-64; 256 key bits leave the total secret at 448 bits.
        ProtocolParams {
            r_len: 64,
            h_len: 64,
            key_len: 256,
        }
    }
}

impl ProtocolParams {
    /// Total secret length `l = r_len + 2 h_len + key_len`.
    pub fn total_len(&self) -> usize {
        self.r_len + 2 * self.h_len + self.key_len
    }
}

/// The partitioned secret `s = (s1, s2, s3)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretTriple {
    pub s1: Bits,
    pub s2: Bits,
    pub s3: Bits,
}

impl SecretTriple {
    pub fn random(params: &ProtocolParams, rng: &mut impl Rng) -> Self {
        SecretTriple::from_secret(&Bits::random(params.total_len(), rng), params)
            .expect("generated secret has the configured length")
    }

    /// Splits an `l`-bit string into the three parts.
    pub fn from_secret(s: &Bits, params: &ProtocolParams) -> Result<Self> {
        if s.len() != params.total_len() {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: params.total_len(),
            });
        }
        let a = params.r_len + params.h_len;
        let b = a + params.h_len;
        Ok(SecretTriple {
            s1: s.slice(0..a),
            s2: s.slice(a..b),
            s3: s.slice(b..s.len()),
        })
    }

    /// Concatenation `s1 || s2 || s3`.
    pub fn encode(&self) -> Bits {
        self.s1.concat(&self.s2).concat(&self.s3)
    }

    pub fn total_len(&self) -> usize {
        self.s1.len() + self.s2.len() + self.s3.len()
    }

    fn h_len(&self) -> usize {
        self.s2.len()
    }

    fn r_len(&self) -> usize {
        self.s1.len() - self.s2.len()
    }
}

/// n-of-n share set: the XOR of all shares is the encoded secret, and
/// any proper subset is jointly uniform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareSet {
    pub shares: Vec<Bits>,
}

/// Splits `s` into `n` shares: the first `n - 1` are uniformly random and
/// the last is `s` XOR all of them.
pub fn split_secret(s: &Bits, n: usize, rng: &mut impl Rng) -> ShareSet {
    assert!(n >= 1, "need at least one share");
    let mut shares = Vec::with_capacity(n);
    let mut last = s.clone();
    for _ in 0..n - 1 {
        let share = Bits::random(s.len(), rng);
        last.xor_assign(&share).expect("equal lengths");
        shares.push(share);
    }
    shares.push(last);
    ShareSet { shares }
}

/// XOR of all shares.
pub fn combine_shares(set: &ShareSet) -> Result<Bits> {
    let mut iter = set.shares.iter();
    let mut acc = iter.next().ok_or(Error::EmptyShareSet)?.clone();
    for share in iter {
        acc.xor_assign(share)?;
    }
    Ok(acc)
}

/// What a compromised intermediate does with a share passing through it.
#[derive(Clone, Debug)]
pub enum TamperPolicy {
    /// Record the share, deliver it unchanged.
    Passive,
    /// Record the share, deliver the substituted bits instead.
    Modify(Bits),
}

/// Outcome of sending one share along one path.
#[derive(Clone, Debug)]
pub struct Delivery {
    pub delivered: Bits,
    /// True iff some intermediate node on the path is compromised.
    pub learned: bool,
}

/// Simulates transporting a share along a path. Honest-to-honest links
/// are perfectly secret, so the adversary learns the share exactly when
/// it controls an intermediate node; an active intermediate may also
/// substitute the delivered bits.
pub fn transmit_share(
    share: &Bits,
    path: &[NodeId],
    mask: &CompromiseMask,
    policy: &TamperPolicy,
) -> Delivery {
    let learned = path[1..path.len() - 1]
        .iter()
        .any(|&v| mask.is_compromised(v));
    let delivered = match policy {
        TamperPolicy::Modify(subst) if learned => subst.clone(),
        _ => share.clone(),
    };
    Delivery { delivered, learned }
}

/// Short digest used in the confirmation exchange. Implementations only
/// need to be functions of the input; the exchange's security analysis
/// treats them as random oracles of `output_bits` bits.
pub trait Digest {
    fn output_bits(&self) -> usize;
    fn digest(&self, input: &Bits) -> Bits;
}

/// FNV-1a based digest, extended blockwise past 64 bits. Deterministic
/// and cheap; suitable for protocol runs where the digest just needs to
/// behave like a fixed public hash function.
#[derive(Clone, Debug)]
pub struct Fnv1aDigest {
    out_bits: usize,
}

impl Fnv1aDigest {
    pub fn new(out_bits: usize) -> Self {
        assert!(out_bits >= 1);
        Fnv1aDigest { out_bits }
    }

    fn block(input: &Bits, counter: u64) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for b in counter
            .to_be_bytes()
            .iter()
            .chain((input.len() as u64).to_be_bytes().iter())
            .chain(input.as_bytes())
        {
            h ^= *b as u64;
            h = h.wrapping_mul(PRIME);
        }
        h
    }
}

impl Digest for Fnv1aDigest {
    fn output_bits(&self) -> usize {
        self.out_bits
    }

    fn digest(&self, input: &Bits) -> Bits {
        let mut out = Bits::zeros(0);
        let mut counter = 0u64;
        while out.len() < self.out_bits {
            let word = Self::block(input, counter);
            let take = (self.out_bits - out.len()).min(64);
            let chunk = Bits::from_bytes(&word.to_be_bytes(), 64).expect("8 bytes is 64 bits");
            out = out.concat(&chunk.slice(0..take));
            counter += 1;
        }
        out
    }
}

/// Seeded random-oracle table: every distinct input gets an independent
/// uniform output, memoized so repeated queries agree. The instrument for
/// soundness statistics, where collision rates must match the ideal
/// 2^-h_len exactly.
pub struct RandomOracleDigest {
    out_bits: usize,
    state: Mutex<OracleState>,
}

struct OracleState {
    table: HashMap<Bits, Bits>,
    rng: ChaCha12Rng,
}

impl RandomOracleDigest {
    pub fn new(out_bits: usize, seed: u64) -> Self {
        assert!(out_bits >= 1);
        RandomOracleDigest {
            out_bits,
            state: Mutex::new(OracleState {
                table: HashMap::new(),
                rng: ChaCha12Rng::seed_from_u64(seed),
            }),
        }
    }
}

impl Digest for RandomOracleDigest {
    fn output_bits(&self) -> usize {
        self.out_bits
    }

    fn digest(&self, input: &Bits) -> Bits {
        let mut state = self.state.lock().expect("oracle lock");
        if let Some(hit) = state.table.get(input) {
            return hit.clone();
        }
        let fresh = Bits::random(self.out_bits, &mut state.rng);
        state.table.insert(input.clone(), fresh.clone());
        fresh
    }
}

/// Challenge message: `m1 = (r || H(s3)) XOR s1`.
pub fn make_challenge(s: &SecretTriple, r: &Bits, h: &dyn Digest) -> Result<Bits> {
    if r.len() != s.r_len() || h.output_bits() != s.h_len() {
        return Err(Error::LengthMismatch {
            left: r.len() + h.output_bits(),
            right: s.s1.len(),
        });
    }
    r.concat(&h.digest(&s.s3)).xor(&s.s1)
}

/// Responder side: decode `(r' || h_a) = m1 XOR s1'`, check
/// `h_a == H(s3')`, and answer `m2 = H(r') XOR s2'` only when the check
/// passes.
pub fn respond(m1: &Bits, s_prime: &SecretTriple, h: &dyn Digest) -> Result<(bool, Option<Bits>)> {
    let decoded = m1.xor(&s_prime.s1)?;
    let r_prime = decoded.slice(0..s_prime.r_len());
    let h_received = decoded.slice(s_prime.r_len()..decoded.len());
    if h_received != h.digest(&s_prime.s3) {
        return Ok((false, None));
    }
    let m2 = h.digest(&r_prime).xor(&s_prime.s2)?;
    Ok((true, Some(m2)))
}

/// Initiator side: accept iff `m2 XOR s2 == H(r)`.
pub fn verify(m2: &Bits, s: &SecretTriple, r: &Bits, h: &dyn Digest) -> Result<bool> {
    Ok(m2.xor(&s.s2)? == h.digest(r))
}

/// How an exchange ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accept,
    /// Responder saw a digest mismatch and aborted without answering.
    RejectBob,
    /// Responder answered but the initiator's check failed.
    RejectAlice,
}

/// Full transcript of one confirmation exchange.
#[derive(Clone, Debug)]
pub struct ExchangeTranscript {
    pub m1: Bits,
    pub m2: Option<Bits>,
    pub outcome: Outcome,
    /// Present exactly when the outcome is [`Outcome::Accept`].
    pub derived_key: Option<Bits>,
}

/// Runs challenge, response, and verification between holders of `s` and
/// `s_prime`. On acceptance both sides keep `s3`.
pub fn run_exchange(
    s: &SecretTriple,
    s_prime: &SecretTriple,
    rng: &mut impl Rng,
    h: &dyn Digest,
) -> Result<ExchangeTranscript> {
    let r = Bits::random(s.r_len(), rng);
    let m1 = make_challenge(s, &r, h)?;
    let (check, m2) = respond(&m1, s_prime, h)?;
    if !check {
        return Ok(ExchangeTranscript {
            m1,
            m2: None,
            outcome: Outcome::RejectBob,
            derived_key: None,
        });
    }
    let m2 = m2.expect("responder produced m2 on success");
    if !verify(&m2, s, &r, h)? {
        return Ok(ExchangeTranscript {
            m1,
            m2: Some(m2),
            outcome: Outcome::RejectAlice,
            derived_key: None,
        });
    }
    Ok(ExchangeTranscript {
        m1,
        m2: Some(m2),
        outcome: Outcome::Accept,
        derived_key: Some(s.s3.clone()),
    })
}

/// A middle party that knows both triples and sees the initiator's
/// challenge can splice the exchange: it recovers the nonce from `m1`
/// with `s1`, re-encodes the challenge for the responder under
/// `s_prime`, and answers the initiator directly under `s`. Both checks
/// then pass even though `s != s_prime`.
pub fn forge_acceptance(
    s: &SecretTriple,
    s_prime: &SecretTriple,
    m1: &Bits,
    h: &dyn Digest,
) -> Result<(Bits, Bits)> {
    let r = m1.xor(&s.s1)?.slice(0..s.r_len());
    let m1_forged = make_challenge(s_prime, &r, h)?;
    let m2_forged = h.digest(&r).xor(&s.s2)?;
    Ok((m1_forged, m2_forged))
}

/// XOR of the two round keys of the responder-initiated second round.
/// Callers should regenerate when the combination is all-zero
/// ([`Bits::is_zero`]); that only happens when both rounds produced the
/// same key.
pub fn two_round_combine(k1: &Bits, k2: &Bits) -> Result<Bits> {
    k1.xor(k2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Identity-truncation digest: injective whenever the input is no
    /// longer than the output, which makes check failures deterministic.
    struct TruncatingDigest {
        out_bits: usize,
    }

    impl Digest for TruncatingDigest {
        fn output_bits(&self) -> usize {
            self.out_bits
        }

        fn digest(&self, input: &Bits) -> Bits {
            let mut out = input.clone();
            if out.len() > self.out_bits {
                out = out.slice(0..self.out_bits);
            } else if out.len() < self.out_bits {
                out = out.concat(&Bits::zeros(self.out_bits - out.len()));
            }
            out
        }
    }

    fn tiny_params() -> ProtocolParams {
        ProtocolParams {
            r_len: 8,
            h_len: 8,
            key_len: 8,
        }
    }

    #[test]
    fn default_lengths_add_up() {
        let p = ProtocolParams::default();
        assert_eq!(p.total_len(), 448);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = SecretTriple::random(&p, &mut rng);
        assert_eq!(s.encode().len(), 448);
        assert_eq!(
            SecretTriple::from_secret(&s.encode(), &p).unwrap(),
            s
        );
    }

    #[test]
    fn single_share_is_the_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = Bits::random(32, &mut rng);
        let set = split_secret(&s, 1, &mut rng);
        assert_eq!(set.shares, vec![s]);
    }

    #[test]
    fn two_shares_xor_back_to_the_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = Bits::from_bytes(&[0b1010_0000], 4).unwrap();
        let set = split_secret(&s, 2, &mut rng);
        assert_eq!(set.shares.len(), 2);
        assert_eq!(set.shares[1], s.xor(&set.shares[0]).unwrap());
        assert_eq!(combine_shares(&set).unwrap(), s);
        // The worked identity: r = 0110 pads 1010 into 1100.
        let r = Bits::from_bytes(&[0b0110_0000], 4).unwrap();
        assert_eq!(s.xor(&r).unwrap(), Bits::from_bytes(&[0b1100_0000], 4).unwrap());
    }

    #[test]
    fn round_trip_over_share_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=64 {
            let s = Bits::random(96, &mut rng);
            let set = split_secret(&s, n, &mut rng);
            assert_eq!(combine_shares(&set).unwrap(), s);
        }
    }

    #[test]
    fn flipped_bit_moves_through_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = Bits::random(16, &mut rng);
        let mut set = split_secret(&s, 4, &mut rng);
        let flip = Bits::from_bytes(&[0x00, 0x10], 16).unwrap();
        set.shares[2] = set.shares[2].xor(&flip).unwrap();
        assert_eq!(combine_shares(&set).unwrap(), s.xor(&flip).unwrap());
    }

    #[test]
    fn combine_rejects_bad_sets() {
        assert!(matches!(
            combine_shares(&ShareSet { shares: vec![] }),
            Err(Error::EmptyShareSet)
        ));
        let set = ShareSet {
            shares: vec![Bits::zeros(8), Bits::zeros(9)],
        };
        assert!(matches!(
            combine_shares(&set),
            Err(Error::LengthMismatch { .. })
        ));
    }

    /// XOR of a proper subset of shares stays uniform whatever the
    /// secret; 16-cell chi-squared on 4-bit shares.
    #[test]
    fn proper_subsets_look_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = Bits::from_bytes(&[0b1111_0000], 4).unwrap();
        let samples = 16_000usize;
        let mut counts = [0usize; 16];
        for _ in 0..samples {
            let set = split_secret(&s, 3, &mut rng);
            let sub = set.shares[0].xor(&set.shares[1]).unwrap();
            counts[(sub.as_bytes()[0] >> 4) as usize] += 1;
        }
        let expected = samples as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-squared critical value, df=15, alpha=0.001
        assert!(chi2 < 37.697298, "chi2 = {chi2}");
    }

    #[test]
    fn transmission_learns_exactly_on_compromised_interiors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let share = Bits::random(16, &mut rng);
        let mask = CompromiseMask::from_flags(vec![false, true, false, false]);

        let honest = transmit_share(&share, &[0, 3], &mask, &TamperPolicy::Passive);
        assert!(!honest.learned);
        assert_eq!(honest.delivered, share);

        let tapped = transmit_share(&share, &[0, 1, 3], &mask, &TamperPolicy::Passive);
        assert!(tapped.learned);
        assert_eq!(tapped.delivered, share);

        let garbage = Bits::random(16, &mut rng);
        let mangled = transmit_share(
            &share,
            &[0, 1, 3],
            &mask,
            &TamperPolicy::Modify(garbage.clone()),
        );
        assert!(mangled.learned);
        assert_eq!(mangled.delivered, garbage);
    }

    #[test]
    fn adversary_reconstructs_when_every_path_leaks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = Bits::random(24, &mut rng);
        let set = split_secret(&s, 3, &mut rng);
        let mask = CompromiseMask::from_flags(vec![false, true, true, true, false]);
        let paths: [&[NodeId]; 3] = [&[0, 1, 4], &[0, 2, 4], &[0, 3, 4]];
        let mut eve = Vec::new();
        for (share, path) in set.shares.iter().zip(paths) {
            let d = transmit_share(share, path, &mask, &TamperPolicy::Passive);
            assert!(d.learned);
            eve.push(d.delivered);
        }
        assert_eq!(combine_shares(&ShareSet { shares: eve }).unwrap(), s);
    }

    #[test]
    fn challenge_with_zero_pad_is_plain() {
        let h = TruncatingDigest { out_bits: 8 };
        let s = SecretTriple {
            s1: Bits::zeros(16),
            s2: Bits::zeros(8),
            s3: Bits::from_bytes(&[0xA5], 8).unwrap(),
        };
        let r = Bits::from_bytes(&[0x3C], 8).unwrap();
        let m1 = make_challenge(&s, &r, &h).unwrap();
        assert_eq!(m1, r.concat(&h.digest(&s.s3)));
    }

    /// Hand-XORed vector: r=0x3C, H(s3)=s3=0xA5, s1=0xFFFF.
    #[test]
    fn challenge_fixed_vector() {
        let h = TruncatingDigest { out_bits: 8 };
        let s = SecretTriple {
            s1: Bits::from_bytes(&[0xFF, 0xFF], 16).unwrap(),
            s2: Bits::zeros(8),
            s3: Bits::from_bytes(&[0xA5], 8).unwrap(),
        };
        let r = Bits::from_bytes(&[0x3C], 8).unwrap();
        let m1 = make_challenge(&s, &r, &h).unwrap();
        assert_eq!(m1, Bits::from_bytes(&[0xC3, 0x5A], 16).unwrap());
    }

    #[test]
    fn challenge_is_linear_in_the_nonce() {
        let h = TruncatingDigest { out_bits: 8 };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = SecretTriple::random(&tiny_params(), &mut rng);
        let r1 = Bits::from_bytes(&[0x11], 8).unwrap();
        let r2 = Bits::from_bytes(&[0x2F], 8).unwrap();
        let m1 = make_challenge(&s, &r1, &h).unwrap();
        let m2 = make_challenge(&s, &r2, &h).unwrap();
        let diff = m1.xor(&m2).unwrap();
        assert_eq!(diff.slice(0..8), r1.xor(&r2).unwrap());
        assert!(diff.slice(8..16).is_zero());
    }

    #[test]
    fn challenge_rejects_wrong_nonce_length() {
        let h = TruncatingDigest { out_bits: 8 };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = SecretTriple::random(&tiny_params(), &mut rng);
        let bad_r = Bits::zeros(9);
        assert!(make_challenge(&s, &bad_r, &h).is_err());
    }

    #[test]
    fn matched_keys_pass_both_checks() {
        let h = TruncatingDigest { out_bits: 8 };
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let s = SecretTriple::random(&tiny_params(), &mut rng);
        let r = Bits::random(8, &mut rng);
        let m1 = make_challenge(&s, &r, &h).unwrap();
        let (check, m2) = respond(&m1, &s, &h).unwrap();
        assert!(check);
        let m2 = m2.unwrap();
        assert_eq!(m2, h.digest(&r).xor(&s.s2).unwrap());
        assert!(verify(&m2, &s, &r, &h).unwrap());
    }

    #[test]
    fn mismatched_s3_is_caught_under_an_injective_digest() {
        let h = TruncatingDigest { out_bits: 8 };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = SecretTriple::random(&tiny_params(), &mut rng);
        let mut s_prime = s.clone();
        s_prime.s3 = s.s3.xor(&Bits::from_bytes(&[0x01], 8).unwrap()).unwrap();
        let r = Bits::random(8, &mut rng);
        let m1 = make_challenge(&s, &r, &h).unwrap();
        let (check, m2) = respond(&m1, &s_prime, &h).unwrap();
        assert!(!check);
        assert!(m2.is_none());
    }

    /// A mismatched pad s1' garbles the decoded digest; under a random
    /// oracle the check still passes about 2^-h_len of the time.
    #[test]
    fn responder_collision_rate_matches_the_oracle() {
        let h = RandomOracleDigest::new(8, 42);
        let params = tiny_params();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let trials = 100_000;
        let mut accepted = 0usize;
        for _ in 0..trials {
            let s = SecretTriple::random(&params, &mut rng);
            let mut s_prime = SecretTriple::random(&params, &mut rng);
            s_prime.s2 = s.s2.clone();
            s_prime.s3 = s.s3.clone();
            let r = Bits::random(8, &mut rng);
            let m1 = make_challenge(&s, &r, &h).unwrap();
            if respond(&m1, &s_prime, &h).unwrap().0 {
                accepted += 1;
            }
        }
        // Binomial(1e5, 2^-8): mean 390.6, sigma 19.7; 3-sigma band.
        assert!(
            (331..=450).contains(&accepted),
            "accepted = {accepted} of {trials}"
        );
    }

    #[test]
    fn random_m2_fools_the_verifier_at_the_collision_rate() {
        let h = RandomOracleDigest::new(8, 43);
        let params = tiny_params();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let trials = 100_000;
        let mut accepted = 0usize;
        for _ in 0..trials {
            let s = SecretTriple::random(&params, &mut rng);
            let r = Bits::random(8, &mut rng);
            let m2 = Bits::random(8, &mut rng);
            if verify(&m2, &s, &r, &h).unwrap() {
                accepted += 1;
            }
        }
        assert!(
            (331..=450).contains(&accepted),
            "accepted = {accepted} of {trials}"
        );
    }

    #[test]
    fn exchange_accepts_matching_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let params = ProtocolParams::default();
        let h = Fnv1aDigest::new(params.h_len);
        for _ in 0..1000 {
            let s = SecretTriple::random(&params, &mut rng);
            let t = run_exchange(&s, &s, &mut rng, &h).unwrap();
            assert_eq!(t.outcome, Outcome::Accept);
            assert_eq!(t.derived_key.as_ref(), Some(&s.s3));
        }
    }

    #[test]
    fn exchange_rejects_mismatched_key_material() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let params = ProtocolParams {
            r_len: 16,
            h_len: 16,
            key_len: 16,
        };
        let h = RandomOracleDigest::new(16, 44);
        let trials = 10_000;
        let mut rejected = 0usize;
        for _ in 0..trials {
            let s = SecretTriple::random(&params, &mut rng);
            let s_prime = SecretTriple::random(&params, &mut rng);
            let t = run_exchange(&s, &s_prime, &mut rng, &h).unwrap();
            if t.outcome != Outcome::Accept {
                assert!(t.derived_key.is_none());
                rejected += 1;
            }
        }
        // Expected false accepts: 1e4 * 2^-16 = 0.15.
        assert!(trials - rejected <= 3, "false accepts = {}", trials - rejected);
    }

    #[test]
    fn protocol_restarts_cleanly_after_a_reject() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let params = tiny_params();
        let h = TruncatingDigest { out_bits: 8 };
        let s = SecretTriple::random(&params, &mut rng);
        let mut s_prime = SecretTriple::random(&params, &mut rng);
        s_prime.s3 = s.s3.xor(&Bits::from_bytes(&[0xFF], 8).unwrap()).unwrap();
        let first = run_exchange(&s, &s_prime, &mut rng, &h).unwrap();
        assert_ne!(first.outcome, Outcome::Accept);
        // Round two with fresh matching secrets over honest channels.
        let fresh = SecretTriple::random(&params, &mut rng);
        let second = run_exchange(&fresh, &fresh, &mut rng, &h).unwrap();
        assert_eq!(second.outcome, Outcome::Accept);
    }

    #[test]
    fn full_knowledge_forgery_always_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let params = ProtocolParams::default();
        let h = Fnv1aDigest::new(params.h_len);
        for _ in 0..100 {
            let s = SecretTriple::random(&params, &mut rng);
            let s_prime = SecretTriple::random(&params, &mut rng);
            let r = Bits::random(s.s1.len() - s.s2.len(), &mut rng);
            let m1 = make_challenge(&s, &r, &h).unwrap();
            let (m1_f, m2_f) = forge_acceptance(&s, &s_prime, &m1, &h).unwrap();
            let (check, _) = respond(&m1_f, &s_prime, &h).unwrap();
            assert!(check, "responder must accept the spliced challenge");
            assert!(verify(&m2_f, &s, &r, &h).unwrap());
        }
    }

    #[test]
    fn forgery_with_equal_triples_is_the_honest_relay() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let params = tiny_params();
        let h = Fnv1aDigest::new(8);
        let s = SecretTriple::random(&params, &mut rng);
        let r = Bits::random(8, &mut rng);
        let m1 = make_challenge(&s, &r, &h).unwrap();
        let (m1_f, m2_f) = forge_acceptance(&s, &s, &m1, &h).unwrap();
        assert_eq!(m1_f, m1);
        let (_, honest_m2) = respond(&m1, &s, &h).unwrap();
        assert_eq!(Some(m2_f), honest_m2);
    }

    /// Knowing only the responder's triple lets the attacker satisfy the
    /// responder, but the initiator's check then fails except on digest
    /// collisions.
    #[test]
    fn partial_knowledge_forgery_fails_the_initiator() {
        let h = RandomOracleDigest::new(8, 45);
        let params = tiny_params();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let trials = 10_000;
        let mut fooled = 0usize;
        for _ in 0..trials {
            let s = SecretTriple::random(&params, &mut rng);
            let s_prime = SecretTriple::random(&params, &mut rng);
            let r_alice = Bits::random(8, &mut rng);
            // Eve knows s_prime only: she invents her own nonce for the
            // responder and answers the initiator under s_prime.
            let r_eve = Bits::random(8, &mut rng);
            let m1_f = make_challenge(&s_prime, &r_eve, &h).unwrap();
            let (check, m2) = respond(&m1_f, &s_prime, &h).unwrap();
            assert!(check);
            if verify(&m2.unwrap(), &s, &r_alice, &h).unwrap() {
                fooled += 1;
            }
        }
        // Binomial(1e4, 2^-8): mean 39, sigma 6.2; stay below +3 sigma.
        assert!(fooled <= 58, "fooled = {fooled}");
    }

    #[test]
    fn two_round_combination_is_xor() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let k1 = Bits::random(32, &mut rng);
        assert_eq!(two_round_combine(&k1, &Bits::zeros(32)).unwrap(), k1);
        assert!(two_round_combine(&k1, &k1).unwrap().is_zero());
        assert!(two_round_combine(&k1, &Bits::zeros(16)).is_err());
    }

    /// A known first-round key XORed with a secret second-round key
    /// leaves the combination uniform; 16-cell chi-squared.
    #[test]
    fn second_round_restores_secrecy() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let k1 = Bits::from_bytes(&[0b1001_0000], 4).unwrap();
        let samples = 16_000;
        let mut counts = [0usize; 16];
        for _ in 0..samples {
            let k2 = Bits::random(4, &mut rng);
            let k = two_round_combine(&k1, &k2).unwrap();
            counts[(k.as_bytes()[0] >> 4) as usize] += 1;
        }
        let expected = samples as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 37.697298, "chi2 = {chi2}");
    }

    /// Replacing one share with random bits makes the reconstruction
    /// uniform and independent of the secret.
    #[test]
    fn substituted_share_erases_the_secret() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let s = Bits::from_bytes(&[0b0101_0000], 4).unwrap();
        let samples = 16_000;
        let mut counts = [0usize; 16];
        for _ in 0..samples {
            let mut set = split_secret(&s, 3, &mut rng);
            set.shares[1] = Bits::random(4, &mut rng);
            let got = combine_shares(&set).unwrap();
            counts[(got.as_bytes()[0] >> 4) as usize] += 1;
        }
        let expected = samples as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 37.697298, "chi2 = {chi2}");
    }

    #[test]
    fn fnv_digest_is_deterministic_and_length_correct() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for bits in [1usize, 8, 16, 63, 64, 65, 128] {
            let h = Fnv1aDigest::new(bits);
            let x = Bits::random(100, &mut rng);
            let d1 = h.digest(&x);
            assert_eq!(d1.len(), bits);
            assert_eq!(d1, h.digest(&x));
        }
        let h = Fnv1aDigest::new(64);
        let a = h.digest(&Bits::from_bytes(&[0x01], 8).unwrap());
        let b = h.digest(&Bits::from_bytes(&[0x02], 8).unwrap());
        assert_ne!(a, b);
    }

    #[test]
    fn random_oracle_memoizes() {
        let h = RandomOracleDigest::new(16, 7);
        let x = Bits::from_bytes(&[0xAB], 8).unwrap();
        assert_eq!(h.digest(&x), h.digest(&x));
    }
}
