//! Certified toy instances shipped with the crate. All use the AMD code
//! over GF(8) with one message element (`k = 3`, `rho = 1/4`).

use crate::gf2::Gf2Matrix;
use crate::lecss::LecssParams;
use crate::nmcode::SchemeParams;

/// Searched LECSS `[16, k_msg = 9, z = 5]` with `d = 2`, `t = 2`.
pub const TOY_JSON: &str = include_str!("../data/toy_n16_d2_t2.json");
/// Searched LECSS `[16, 9, z = 2]` with `d = 3`, `t = 1`.
pub const D3_JSON: &str = include_str!("../data/toy_n16_d3_t1.json");
/// Reed–Muller based LECSS with `d = 2`, `t = 3`.
pub const REED_MULLER_JSON: &str = include_str!("../data/rm_n16_d2_t3.json");

/// Search arguments that regenerate the searched instances:
/// `(n, k_msg, d_target, t_target, trials, seed)`.
pub const TOY_SEARCH: (usize, usize, usize, usize, u64, u64) = (16, 9, 2, 2, 1000, 1);
pub const D3_SEARCH: (usize, usize, usize, usize, u64, u64) = (16, 9, 3, 1, 1000, 1);

pub fn toy() -> SchemeParams {
    SchemeParams::from_json(TOY_JSON).expect("bundled instance parses")
}

pub fn d3() -> SchemeParams {
    SchemeParams::from_json(D3_JSON).expect("bundled instance parses")
}

pub fn reed_muller() -> SchemeParams {
    SchemeParams::from_json(REED_MULLER_JSON).expect("bundled instance parses")
}

pub fn all() -> [(&'static str, SchemeParams); 3] {
    [
        ("toy_n16_d2_t2", toy()),
        ("toy_n16_d3_t1", d3()),
        ("rm_n16_d2_t3", reed_muller()),
    ]
}

/// Evaluation vector of the monomial `prod_{v in vars} x_v` over `{0,1}^4`.
fn monomial(vars: &[usize]) -> String {
    (0..16u32)
        .map(|x| {
            if vars.iter().all(|&v| x >> v & 1 == 1) {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Randomness rows span RM(1,4) (dual distance 4, so `t = 3`); message rows
/// are the six quadratic and three of the cubic monomials.
pub fn reed_muller_lecss() -> LecssParams {
    let build = |sets: &[&[usize]]| {
        let rows: Vec<String> = sets.iter().map(|v| monomial(v)).collect();
        Gf2Matrix::from_bit_rows(&rows.iter().map(String::as_str).collect::<Vec<_>>())
            .expect("16 columns")
    };
    let g_rnd = build(&[&[], &[0], &[1], &[2], &[3]]);
    let g_msg = build(&[
        &[0, 1],
        &[0, 2],
        &[0, 3],
        &[1, 2],
        &[1, 3],
        &[2, 3],
        &[0, 1, 2],
        &[0, 1, 3],
        &[0, 2, 3],
    ]);
    LecssParams::from_generators(g_msg, g_rnd).expect("full rank")
}
