use std::fmt;
use std::str::FromStr;

use super::{Nmatrix, NmatrixError, ValueSet};

/// The four-valued matrices shipped with the crate. All share the values
/// `P, t, f, R` (in that order) with `P` and `t` designated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Tbat,
    TbatOriginal,
    W,
    WSimplified,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [
        Builtin::Tbat,
        Builtin::TbatOriginal,
        Builtin::W,
        Builtin::WSimplified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Tbat => "TBAT",
            Builtin::TbatOriginal => "TBAT_ORIGINAL",
            Builtin::W => "W",
            Builtin::WSimplified => "W_SIMPLIFIED",
        }
    }

    pub fn matrix(self) -> Nmatrix {
        let (neg, boxed, imp) = match self {
            Builtin::Tbat => (TBAT_NEG, TBAT_BOX, TBAT_IMPL),
            Builtin::TbatOriginal => (TBAT_NEG, TBAT_BOX, TBAT_ORIGINAL_IMPL),
            Builtin::W => (W_NEG, W_BOX, W_IMPL),
            Builtin::WSimplified => (W_SIMPLIFIED_NEG, W_BOX, W_IMPL),
        };
        Nmatrix::new(
            self.name(),
            ["P", "t", "f", "R"].map(String::from).to_vec(),
            D,
            neg.to_vec(),
            boxed.to_vec(),
            imp.iter().flatten().copied().collect(),
        )
        .expect("built-in matrices are well formed")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = NmatrixError;

    fn from_str(s: &str) -> Result<Builtin, NmatrixError> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| NmatrixError::UnknownMatrix(s.to_string()))
    }
}

/// Looks up a built-in matrix by (case-insensitive) name.
pub fn builtin_matrix(name: &str) -> Result<Nmatrix, NmatrixError> {
    name.parse::<Builtin>().map(Builtin::matrix)
}

const fn set(bits: u32) -> ValueSet {
    ValueSet(bits)
}

const P: ValueSet = set(1 << 0);
const T: ValueSet = set(1 << 1);
const F: ValueSet = set(1 << 2);
const R: ValueSet = set(1 << 3);
const D: ValueSet = set(0b0011);
const ND: ValueSet = set(0b1100);
const PT: ValueSet = D;
const FR: ValueSet = ND;

const TBAT_NEG: [ValueSet; 4] = [R, F, T, P];
const TBAT_BOX: [ValueSet; 4] = [P, FR, FR, R];
const TBAT_IMPL: [[ValueSet; 4]; 4] = [[P, T, F, R], [P, PT, F, F], [P, PT, PT, T], [P, P, P, P]];
const TBAT_ORIGINAL_IMPL: [[ValueSet; 4]; 4] =
    [[P, T, F, R], [P, PT, F, F], [P, PT, PT, PT], [P, P, P, P]];

const W_NEG: [ValueSet; 4] = [ND, ND, D, D];
const W_SIMPLIFIED_NEG: [ValueSet; 4] = [ND, ND, T, P];
const W_BOX: [ValueSet; 4] = [D, ND, ND, ND];
const W_IMPL: [[ValueSet; 4]; 4] = [[D, D, ND, ND], [D, D, ND, ND], [D; 4], [D; 4]];
