//! Keyed function families, random samplers, and the encryption
//! constructions realised as per-invocation truth tables.
//!
//! Every encryption query materialises one [`FunctionTable`]: the
//! per-invocation randomness `r` is drawn exactly once per oracle call, so a
//! single deterministic table serves every term of a superposition query.
//!
//! Shipped constructions:
//!
//! * `construction-1prime` — `c ← F_K(r) ⊕ m`, with `r` emitted classically.
//! * `construction-1` — `s ← F_r(m)`, `c ← F_K(s) ⊕ m`, ciphertext `(s, c)`.
//! * `construction-1-ideal` — construction 1 with `F_r` replaced by a fresh
//!   random table per invocation and `F_K` by one experiment-lifetime random
//!   table.
//! * `construction-2` — encrypt-then-MAC: inner ciphertext plus a tag
//!   `τ ← F_{K₂}(c)`.
//! * `construction-2-ideal` — construction 2 with a true random tag function.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qcore::{BitString, FunctionTable, PermutationTable};
use crate::seed::SeedTree;
use crate::{Error, Result};

fn mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Hard upper bound on truth-table input width (memory guard).
pub const TABLE_WIDTH_CAP: usize = 24;

/// Sample a uniformly random function table `{0,1}^in → {0,1}^out`.
pub fn sample_random_function<R: Rng + ?Sized>(
    in_width: usize,
    out_width: usize,
    rng: &mut R,
) -> Result<FunctionTable> {
    if in_width > TABLE_WIDTH_CAP {
        return Err(Error::QubitCapExceeded {
            requested: in_width,
            cap: TABLE_WIDTH_CAP,
        });
    }
    let m = mask(out_width);
    let entries = (0..1u64 << in_width).map(|_| rng.gen::<u64>() & m).collect();
    FunctionTable::new(in_width, out_width, entries)
}

/// Sample a uniformly random permutation of `{0,…,2^width−1}` by an unbiased
/// shuffle.
pub fn sample_random_permutation<R: Rng + ?Sized>(
    width: usize,
    rng: &mut R,
) -> Result<PermutationTable> {
    if width > TABLE_WIDTH_CAP {
        return Err(Error::QubitCapExceeded {
            requested: width,
            cap: TABLE_WIDTH_CAP,
        });
    }
    let mut entries: Vec<u64> = (0..1u64 << width).collect();
    entries.shuffle(rng);
    PermutationTable::new(width, entries)
}

/// The reserved plaintext returned for invalid tags.
///
/// Decryption answers live in `n_m + 1` bits: messages embed as `0‖m` and the
/// reject string is `1‖0^{n_m}`, which is outside the message space and fixed
/// for a whole experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BotString {
    width: usize,
    value: u64,
}

impl BotString {
    pub fn for_message_width(n_m: usize) -> Self {
        BotString {
            width: n_m + 1,
            value: 1u64 << n_m,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn value(&self) -> u64 {
        self.value
    }
}

/// Which toy family backs the keyed constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// `F_K(x) = K ⊕ x`. Trivially distinguishable; the positive control.
    Weak,
    /// Output of a seeded pseudorandom expansion of `(key ‖ x)`. A stand-in
    /// for a real block cipher at desk scale.
    Strong,
}

/// A keyed function family `F: K × X → Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QprfFamily {
    kind: FamilyKind,
    key_width: usize,
    in_width: usize,
    out_width: usize,
    base: SeedTree,
}

impl QprfFamily {
    /// The weak family `F_K(x) = K ⊕ x` with `key = in = out = width`.
    pub fn weak_xor(width: usize) -> Self {
        QprfFamily {
            kind: FamilyKind::Weak,
            key_width: width,
            in_width: width,
            out_width: width,
            base: SeedTree::from_master(0),
        }
    }

    /// The strong toy family at arbitrary widths.
    pub fn strong(key_width: usize, in_width: usize, out_width: usize) -> Self {
        let base = SeedTree::from_master(0x7173_726f_7066_616d)
            .child_idx("kw", key_width as u64)
            .child_idx("iw", in_width as u64)
            .child_idx("ow", out_width as u64);
        QprfFamily {
            kind: FamilyKind::Strong,
            key_width,
            in_width,
            out_width,
            base,
        }
    }

    pub fn of_kind(
        kind: FamilyKind,
        key_width: usize,
        in_width: usize,
        out_width: usize,
    ) -> Result<Self> {
        match kind {
            FamilyKind::Strong => Ok(QprfFamily::strong(key_width, in_width, out_width)),
            FamilyKind::Weak => {
                if key_width != in_width || in_width != out_width {
                    return Err(Error::InvalidConfig(format!(
                        "weak family needs key = in = out widths, got {key_width}/{in_width}/{out_width}"
                    )));
                }
                Ok(QprfFamily::weak_xor(in_width))
            }
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn key_width(&self) -> usize {
        self.key_width
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    /// Evaluate `F_K(x)`. Total and deterministic.
    pub fn eval(&self, key: u64, x: u64) -> Result<u64> {
        if key > mask(self.key_width) {
            return Err(Error::ValueOutOfRange {
                value: key,
                width: self.key_width,
            });
        }
        if x > mask(self.in_width) {
            return Err(Error::ValueOutOfRange {
                value: x,
                width: self.in_width,
            });
        }
        Ok(match self.kind {
            FamilyKind::Weak => key ^ x,
            FamilyKind::Strong => {
                use rand::RngCore;
                self.base.child_idx("k", key).child_idx("x", x).rng().next_u64()
                    & mask(self.out_width)
            }
        })
    }

    /// Exhaustive table of the instance `F_K = F(K, ·)`.
    pub fn table(&self, key: u64) -> Result<FunctionTable> {
        let entries = (0..1u64 << self.in_width)
            .map(|x| self.eval(key, x))
            .collect::<Result<Vec<_>>>()?;
        FunctionTable::new(self.in_width, self.out_width, entries)
    }

    pub fn sample_key<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen::<u64>() & mask(self.key_width)
    }
}

/// Identifier of a shipped construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "construction-1prime")]
    Construction1Prime,
    #[serde(rename = "construction-1")]
    Construction1,
    #[serde(rename = "construction-1-ideal")]
    Construction1Ideal,
    #[serde(rename = "construction-2")]
    Construction2,
    #[serde(rename = "construction-2-ideal")]
    Construction2Ideal,
}

impl SchemeId {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Construction1Prime => "construction-1prime",
            SchemeId::Construction1 => "construction-1",
            SchemeId::Construction1Ideal => "construction-1-ideal",
            SchemeId::Construction2 => "construction-2",
            SchemeId::Construction2Ideal => "construction-2-ideal",
        }
    }

    /// Schemes that carry a tag and therefore support decryption queries.
    pub fn supports_cca(&self) -> bool {
        matches!(self, SchemeId::Construction2 | SchemeId::Construction2Ideal)
    }
}

impl std::fmt::Display for SchemeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "construction-1prime" => SchemeId::Construction1Prime,
            "construction-1" => SchemeId::Construction1,
            "construction-1-ideal" => SchemeId::Construction1Ideal,
            "construction-2" => SchemeId::Construction2,
            "construction-2-ideal" => SchemeId::Construction2Ideal,
            other => return Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        })
    }
}

/// One invocation of the encryption oracle, materialised.
#[derive(Debug, Clone)]
pub struct EncQuery {
    /// Table applied as a single XOR oracle from the message segment onto the
    /// response segments.
    pub table: FunctionTable,
    /// Classical side output (construction 1′ emits its randomness `r`).
    pub classical: Option<BitString>,
    /// Fresh intermediate values sampled this invocation, for collision
    /// tracking in the idealized variants. Empty when not applicable.
    pub sampled_s: Vec<u64>,
}

/// A keyed (or idealized) instance of one construction, immutable after
/// construction. Safe to share read-only across trial workers.
#[derive(Debug, Clone)]
pub struct SchemeInstance {
    id: SchemeId,
    n_m: usize,
    n_r: usize,
    n_s: usize,
    n_tau: usize,
    outer_family: Option<QprfFamily>,
    outer_key: u64,
    msg_family: Option<QprfFamily>,
    ideal_outer: Option<FunctionTable>,
    inner: Option<Box<SchemeInstance>>,
    tag_family: Option<QprfFamily>,
    tag_key: u64,
    ideal_tag: Option<FunctionTable>,
}

/// Key width used by strong-family instances.
const STRONG_KEY_WIDTH: usize = 32;

impl SchemeInstance {
    /// `c ← F_K(r) ⊕ m` with fresh `r` per invocation.
    pub fn construction_1prime<R: Rng + ?Sized>(
        n_m: usize,
        n_r: usize,
        family: FamilyKind,
        rng: &mut R,
    ) -> Result<Self> {
        let key_width = match family {
            FamilyKind::Weak => n_r,
            FamilyKind::Strong => STRONG_KEY_WIDTH,
        };
        let outer = QprfFamily::of_kind(family, key_width, n_r, n_m)?;
        let outer_key = outer.sample_key(rng);
        Ok(SchemeInstance {
            id: SchemeId::Construction1Prime,
            n_m,
            n_r,
            n_s: 0,
            n_tau: 0,
            outer_family: Some(outer),
            outer_key,
            msg_family: None,
            ideal_outer: None,
            inner: None,
            tag_family: None,
            tag_key: 0,
            ideal_tag: None,
        })
    }

    /// `s ← F_r(m)`, `c ← F_K(s) ⊕ m`.
    pub fn construction_1<R: Rng + ?Sized>(
        n_m: usize,
        n_r: usize,
        n_s: usize,
        family: FamilyKind,
        rng: &mut R,
    ) -> Result<Self> {
        let (outer_kw, msg_kw) = match family {
            FamilyKind::Weak => (n_s, n_r),
            FamilyKind::Strong => (STRONG_KEY_WIDTH, n_r),
        };
        let outer = QprfFamily::of_kind(family, outer_kw, n_s, n_m)?;
        let msg = QprfFamily::of_kind(family, msg_kw, n_m, n_s)?;
        let outer_key = outer.sample_key(rng);
        Ok(SchemeInstance {
            id: SchemeId::Construction1,
            n_m,
            n_r,
            n_s,
            n_tau: 0,
            outer_family: Some(outer),
            outer_key,
            msg_family: Some(msg),
            ideal_outer: None,
            inner: None,
            tag_family: None,
            tag_key: 0,
            ideal_tag: None,
        })
    }

    /// Construction 1 with a fresh true-random `f_j` per invocation and one
    /// experiment-lifetime true-random `g` in place of `F_K`.
    pub fn construction_1_ideal<R: Rng + ?Sized>(
        n_m: usize,
        n_r: usize,
        n_s: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let g = sample_random_function(n_s, n_m, rng)?;
        Ok(SchemeInstance {
            id: SchemeId::Construction1Ideal,
            n_m,
            n_r,
            n_s,
            n_tau: 0,
            outer_family: None,
            outer_key: 0,
            msg_family: None,
            ideal_outer: Some(g),
            inner: None,
            tag_family: None,
            tag_key: 0,
            ideal_tag: None,
        })
    }

    /// Encrypt-then-MAC over an inner construction-1-family scheme, with a
    /// keyed tag `τ ← F_{K₂}(c)`.
    pub fn construction_2<R: Rng + ?Sized>(
        inner: SchemeInstance,
        n_tau: usize,
        tag_family: FamilyKind,
        rng: &mut R,
    ) -> Result<Self> {
        if inner.id.supports_cca() {
            return Err(Error::InvalidConfig(
                "the inner scheme of construction 2 must be a construction-1 variant".into(),
            ));
        }
        let n_c = inner.body_width();
        let key_width = match tag_family {
            FamilyKind::Weak => n_c,
            FamilyKind::Strong => STRONG_KEY_WIDTH,
        };
        let tag = QprfFamily::of_kind(tag_family, key_width, n_c, n_tau)?;
        let tag_key = tag.sample_key(rng);
        Ok(SchemeInstance {
            id: SchemeId::Construction2,
            n_m: inner.n_m,
            n_r: inner.n_r,
            n_s: inner.n_s,
            n_tau,
            outer_family: None,
            outer_key: 0,
            msg_family: None,
            ideal_outer: None,
            inner: Some(Box::new(inner)),
            tag_family: Some(tag),
            tag_key,
            ideal_tag: None,
        })
    }

    /// Construction 2 with the tag family replaced by one experiment-lifetime
    /// true random function.
    pub fn construction_2_ideal<R: Rng + ?Sized>(
        inner: SchemeInstance,
        n_tau: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if inner.id.supports_cca() {
            return Err(Error::InvalidConfig(
                "the inner scheme of construction 2 must be a construction-1 variant".into(),
            ));
        }
        let n_c = inner.body_width();
        let f = sample_random_function(n_c, n_tau, rng)?;
        Ok(SchemeInstance {
            id: SchemeId::Construction2Ideal,
            n_m: inner.n_m,
            n_r: inner.n_r,
            n_s: inner.n_s,
            n_tau,
            outer_family: None,
            outer_key: 0,
            msg_family: None,
            ideal_outer: None,
            inner: Some(Box::new(inner)),
            tag_family: None,
            tag_key: 0,
            ideal_tag: Some(f),
        })
    }

    /// Replace the ideal tag table (pairing harnesses inject a shared table
    /// so a simulation and a direct run see identical oracles).
    pub fn with_ideal_tag(mut self, table: FunctionTable) -> Result<Self> {
        if self.id != SchemeId::Construction2Ideal {
            return Err(Error::WrongScheme {
                expected: "construction-2-ideal",
                got: self.id.as_str(),
            });
        }
        if table.in_width() != self.body_width() || table.out_width() != self.n_tau {
            return Err(Error::WidthMismatch {
                context: "ideal tag table",
                expected: self.body_width(),
                got: table.in_width(),
            });
        }
        self.ideal_tag = Some(table);
        Ok(self)
    }

    pub fn id(&self) -> SchemeId {
        self.id
    }

    pub fn message_width(&self) -> usize {
        self.n_m
    }

    pub fn tag_width(&self) -> usize {
        self.n_tau
    }

    pub fn inner(&self) -> Option<&SchemeInstance> {
        self.inner.as_deref()
    }

    pub fn ideal_tag_table(&self) -> Option<&FunctionTable> {
        self.ideal_tag.as_ref()
    }

    /// Width of the value-complete ciphertext (everything decryption needs).
    pub fn body_width(&self) -> usize {
        match self.id {
            SchemeId::Construction1Prime => self.n_r + self.n_m,
            SchemeId::Construction1 | SchemeId::Construction1Ideal => self.n_s + self.n_m,
            SchemeId::Construction2 | SchemeId::Construction2Ideal => {
                self.inner.as_ref().unwrap().body_width()
            }
        }
    }

    /// Register segments of the value-complete ciphertext, low bits first.
    pub fn body_segments(&self) -> Vec<(String, usize)> {
        match self.id {
            SchemeId::Construction1Prime => {
                vec![("r".into(), self.n_r), ("c".into(), self.n_m)]
            }
            SchemeId::Construction1 | SchemeId::Construction1Ideal => {
                vec![("s".into(), self.n_s), ("c".into(), self.n_m)]
            }
            SchemeId::Construction2 | SchemeId::Construction2Ideal => {
                self.inner.as_ref().unwrap().body_segments()
            }
        }
    }

    /// Register segments written by one encryption query in the games.
    ///
    /// Standalone construction 1′ writes only `c` (its `r` travels
    /// classically); as the inner scheme of construction 2 the full body is
    /// in-register so that decryption is well defined. Construction 2 appends
    /// the tag segment.
    pub fn response_segments(&self) -> Vec<(String, usize)> {
        match self.id {
            SchemeId::Construction1Prime => vec![("c".into(), self.n_m)],
            SchemeId::Construction1 | SchemeId::Construction1Ideal => self.body_segments(),
            SchemeId::Construction2 | SchemeId::Construction2Ideal => {
                let mut segs = self.body_segments();
                segs.push(("tau".into(), self.n_tau));
                segs
            }
        }
    }

    /// Per-invocation tables for construction 1′: samples fresh `r`, returns
    /// it classically along with the XOR-shift table `m ↦ F_K(r) ⊕ m`.
    pub fn c1p_query_tables<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(BitString, FunctionTable)> {
        if self.id != SchemeId::Construction1Prime {
            return Err(Error::WrongScheme {
                expected: "construction-1prime",
                got: self.id.as_str(),
            });
        }
        let r = rng.gen::<u64>() & mask(self.n_r);
        let family = self.outer_family.as_ref().unwrap();
        let y = family.eval(self.outer_key, r)?;
        let table = FunctionTable::from_fn(self.n_m, self.n_m, |m| y ^ m)?;
        Ok((BitString::new(self.n_r, r)?, table))
    }

    /// Per-invocation table for construction 1 (keyed or ideal):
    /// `m ↦ (s, F_K(s) ⊕ m)` with the `s` half in the low bits.
    pub fn c1_query_tables<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EncQuery> {
        match self.id {
            SchemeId::Construction1 => {
                let r = rng.gen::<u64>() & mask(self.n_r);
                let msg = self.msg_family.as_ref().unwrap();
                let outer = self.outer_family.as_ref().unwrap();
                let mut sampled = Vec::with_capacity(1 << self.n_m);
                let mut entries = Vec::with_capacity(1 << self.n_m);
                for m in 0..1u64 << self.n_m {
                    let s = msg.eval(r, m)?;
                    let c = outer.eval(self.outer_key, s)? ^ m;
                    sampled.push(s);
                    entries.push(s | c << self.n_s);
                }
                Ok(EncQuery {
                    table: FunctionTable::new(self.n_m, self.n_s + self.n_m, entries)?,
                    classical: None,
                    sampled_s: sampled,
                })
            }
            SchemeId::Construction1Ideal => {
                let f_j = sample_random_function(self.n_m, self.n_s, rng)?;
                let g = self.ideal_outer.as_ref().unwrap();
                let mut entries = Vec::with_capacity(1 << self.n_m);
                for m in 0..1u64 << self.n_m {
                    let s = f_j.get(m);
                    let c = g.get(s) ^ m;
                    entries.push(s | c << self.n_s);
                }
                Ok(EncQuery {
                    table: FunctionTable::new(self.n_m, self.n_s + self.n_m, entries)?,
                    classical: None,
                    sampled_s: f_j.entries().to_vec(),
                })
            }
            _ => Err(Error::WrongScheme {
                expected: "construction-1 or construction-1-ideal",
                got: self.id.as_str(),
            }),
        }
    }

    /// Per-invocation table for construction 2: `m ↦ (c, τ)` with
    /// `c = E_{K₁}(m; r)` and `τ` from the keyed or ideal tag function.
    pub fn c2_query_tables<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EncQuery> {
        if !self.id.supports_cca() {
            return Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: self.id.as_str(),
            });
        }
        let inner = self.inner.as_ref().unwrap();
        let body = inner.embedded_body_query(rng)?;
        let n_body = inner.body_width();
        let mut entries = Vec::with_capacity(1 << self.n_m);
        for m in 0..1u64 << self.n_m {
            let c = body.table.get(m);
            let tau = self.tag_of(c)?;
            entries.push(c | tau << n_body);
        }
        Ok(EncQuery {
            table: FunctionTable::new(self.n_m, n_body + self.n_tau, entries)?,
            classical: None,
            sampled_s: body.sampled_s,
        })
    }

    /// Full table of the tag function over ciphertext bodies.
    pub fn tag_table(&self) -> Result<FunctionTable> {
        match self.id {
            SchemeId::Construction2 => {
                let f = self.tag_family.as_ref().unwrap();
                f.table(self.tag_key)
            }
            SchemeId::Construction2Ideal => Ok(self.ideal_tag.as_ref().unwrap().clone()),
            _ => Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: self.id.as_str(),
            }),
        }
    }

    /// Body table of this scheme when used inside construction 2: the full
    /// value-complete ciphertext goes into the register.
    pub(crate) fn embedded_body_query<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EncQuery> {
        match self.id {
            SchemeId::Construction1Prime => {
                let r = rng.gen::<u64>() & mask(self.n_r);
                let family = self.outer_family.as_ref().unwrap();
                let y = family.eval(self.outer_key, r)?;
                let entries = (0..1u64 << self.n_m)
                    .map(|m| r | (y ^ m) << self.n_r)
                    .collect();
                Ok(EncQuery {
                    table: FunctionTable::new(self.n_m, self.n_r + self.n_m, entries)?,
                    classical: None,
                    sampled_s: Vec::new(),
                })
            }
            SchemeId::Construction1 | SchemeId::Construction1Ideal => self.c1_query_tables(rng),
            _ => unreachable!("inner schemes are construction-1 variants"),
        }
    }

    /// The tag of a ciphertext body under this construction-2 instance.
    pub fn tag_of(&self, body: u64) -> Result<u64> {
        match self.id {
            SchemeId::Construction2 => {
                let f = self.tag_family.as_ref().unwrap();
                f.eval(self.tag_key, body)
            }
            SchemeId::Construction2Ideal => Ok(self.ideal_tag.as_ref().unwrap().get(body)),
            _ => Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: self.id.as_str(),
            }),
        }
    }

    /// Decrypt a value-complete ciphertext body.
    pub fn decrypt_body(&self, body: u64) -> Result<u64> {
        match self.id {
            SchemeId::Construction1Prime => {
                let r = body & mask(self.n_r);
                let c = body >> self.n_r;
                let family = self.outer_family.as_ref().unwrap();
                Ok(family.eval(self.outer_key, r)? ^ c)
            }
            SchemeId::Construction1 => {
                let s = body & mask(self.n_s);
                let c = body >> self.n_s;
                let family = self.outer_family.as_ref().unwrap();
                Ok(family.eval(self.outer_key, s)? ^ c)
            }
            SchemeId::Construction1Ideal => {
                let s = body & mask(self.n_s);
                let c = body >> self.n_s;
                Ok(self.ideal_outer.as_ref().unwrap().get(s) ^ c)
            }
            SchemeId::Construction2 | SchemeId::Construction2Ideal => {
                self.inner.as_ref().unwrap().decrypt_body(body)
            }
        }
    }

    /// Full decryption table over `(c, τ)` pairs: `0‖D_{K₁}(c)` when the tag
    /// verifies, the reject string otherwise. Applying it as one XOR oracle
    /// onto the response segment realises the honest decryption unitary.
    pub fn c2_decrypt_table(&self) -> Result<FunctionTable> {
        if !self.id.supports_cca() {
            return Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: self.id.as_str(),
            });
        }
        let n_body = self.body_width();
        let bot = BotString::for_message_width(self.n_m);
        let mut entries = Vec::with_capacity(1 << (n_body + self.n_tau));
        for ct in 0..1u64 << (n_body + self.n_tau) {
            let body = ct & mask(n_body);
            let tau = ct >> n_body;
            let out = if self.tag_of(body)? == tau {
                self.decrypt_body(body)?
            } else {
                bot.value()
            };
            entries.push(out);
        }
        FunctionTable::new(n_body + self.n_tau, self.n_m + 1, entries)
    }

    /// The always-reject decryption table: every `(c, τ)` maps to the reject
    /// string.
    pub fn c2_reject_table(&self) -> Result<FunctionTable> {
        if !self.id.supports_cca() {
            return Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: self.id.as_str(),
            });
        }
        let bot = BotString::for_message_width(self.n_m);
        FunctionTable::constant(self.body_width() + self.n_tau, self.n_m + 1, bot.value())
    }

    /// One encryption-oracle invocation of the distinguishing games: the
    /// challenge bit selects the honest table (`b = 1`) or the same table
    /// pre-composed with a freshly sampled permutation of the message
    /// (`b = 0`). The permutation is drawn inside the oracle body, before the
    /// per-invocation randomness.
    pub fn enc_query<R: Rng + ?Sized>(&self, b: u8, rng: &mut R) -> Result<EncQuery> {
        let pi = if b == 0 {
            Some(sample_random_permutation(self.n_m, rng)?)
        } else {
            None
        };
        let mut query = match self.id {
            SchemeId::Construction1Prime => {
                let (r, table) = self.c1p_query_tables(rng)?;
                EncQuery {
                    table,
                    classical: Some(r),
                    sampled_s: Vec::new(),
                }
            }
            SchemeId::Construction1 | SchemeId::Construction1Ideal => self.c1_query_tables(rng)?,
            SchemeId::Construction2 | SchemeId::Construction2Ideal => self.c2_query_tables(rng)?,
        };
        if let Some(pi) = pi {
            query.table = query.table.compose_permutation(&pi)?;
        }
        Ok(query)
    }
}

/// Declarative scheme description; what the CLI and config files carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub scheme: SchemeId,
    pub n_m: usize,
    #[serde(default)]
    pub n_r: Option<usize>,
    #[serde(default)]
    pub n_s: Option<usize>,
    #[serde(default)]
    pub n_tau: Option<usize>,
    #[serde(default = "default_family")]
    pub family: FamilyKind,
    /// Tag family for the encrypt-then-MAC variants; defaults to `family`.
    #[serde(default)]
    pub tag_family: Option<FamilyKind>,
    /// Inner construction for the encrypt-then-MAC variants.
    #[serde(default)]
    pub inner: Option<SchemeId>,
}

fn default_family() -> FamilyKind {
    FamilyKind::Strong
}

impl SchemeSpec {
    pub fn new(scheme: SchemeId, n_m: usize) -> Self {
        SchemeSpec {
            scheme,
            n_m,
            n_r: None,
            n_s: None,
            n_tau: None,
            family: FamilyKind::Strong,
            tag_family: None,
            inner: None,
        }
    }

    pub fn n_r(&self) -> usize {
        self.n_r.unwrap_or(self.n_m)
    }

    pub fn n_s(&self) -> usize {
        self.n_s.unwrap_or(self.n_m + 8)
    }

    pub fn n_tau(&self) -> usize {
        self.n_tau.unwrap_or(4)
    }

    /// Build a keyed instance, consuming randomness for keys and lifetime
    /// tables. The inner scheme of construction 2 is built first, so a CPA
    /// experiment on the inner scheme alone derives the same inner keys from
    /// the same stream.
    pub fn instantiate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SchemeInstance> {
        match self.scheme {
            SchemeId::Construction1Prime => {
                SchemeInstance::construction_1prime(self.n_m, self.n_r(), self.family, rng)
            }
            SchemeId::Construction1 => {
                SchemeInstance::construction_1(self.n_m, self.n_r(), self.n_s(), self.family, rng)
            }
            SchemeId::Construction1Ideal => {
                SchemeInstance::construction_1_ideal(self.n_m, self.n_r(), self.n_s(), rng)
            }
            SchemeId::Construction2 | SchemeId::Construction2Ideal => {
                let inner_spec = self.inner_spec();
                let inner = inner_spec.instantiate(rng)?;
                if self.scheme == SchemeId::Construction2 {
                    let tag_kind = self.tag_family.unwrap_or(self.family);
                    SchemeInstance::construction_2(inner, self.n_tau(), tag_kind, rng)
                } else {
                    SchemeInstance::construction_2_ideal(inner, self.n_tau(), rng)
                }
            }
        }
    }

    /// Width of the value-complete ciphertext this spec produces.
    pub fn body_width(&self) -> usize {
        self.body_segments().iter().map(|(_, w)| w).sum()
    }

    /// Segment plan of the value-complete ciphertext, low bits first.
    pub fn body_segments(&self) -> Vec<(String, usize)> {
        match self.scheme {
            SchemeId::Construction1Prime => {
                vec![("r".into(), self.n_r()), ("c".into(), self.n_m)]
            }
            SchemeId::Construction1 | SchemeId::Construction1Ideal => {
                vec![("s".into(), self.n_s()), ("c".into(), self.n_m)]
            }
            SchemeId::Construction2 | SchemeId::Construction2Ideal => {
                self.inner_spec().body_segments()
            }
        }
    }

    /// Segment plan of one encryption response in the games (mirrors
    /// [`SchemeInstance::response_segments`]).
    pub fn response_segments(&self) -> Vec<(String, usize)> {
        match self.scheme {
            SchemeId::Construction1Prime => vec![("c".into(), self.n_m)],
            SchemeId::Construction1 | SchemeId::Construction1Ideal => self.body_segments(),
            SchemeId::Construction2 | SchemeId::Construction2Ideal => {
                let mut segs = self.body_segments();
                segs.push(("tau".into(), self.n_tau()));
                segs
            }
        }
    }

    /// The spec of construction 2's inner scheme (defaults to
    /// construction 1).
    pub fn inner_spec(&self) -> SchemeSpec {
        SchemeSpec {
            scheme: self.inner.unwrap_or(SchemeId::Construction1),
            n_m: self.n_m,
            n_r: Some(self.n_r()),
            n_s: Some(self.n_s()),
            n_tau: None,
            family: self.family,
            tag_family: None,
            inner: None,
        }
    }
}
