//! Import of SDPA sparse files holding a single semidefinite block.
//!
//! In SDPA notation the dual problem is `max F₀ • X  s.t.  F_i • X = c_i`,
//! `X ⪰ 0`, so `A_i = F_i` and `b_i = c_i`. The objective `F₀` is dropped.
//! Decimal entries are converted exactly to `p / 10^k`.

use spectra_cert_core::ratmat::parse_rational;
use spectra_cert_core::{RatMatrix, Rational, SdpSystem, SymMatrix};

use crate::error::{CliError, CliResult};
use crate::instance::InstanceFile;

const CTX: &str = "SDPA input";

pub fn import_sdpa(text: &str) -> CliResult<InstanceFile> {
    Ok(InstanceFile::from_system(&parse_sdpa(text)?))
}

pub fn parse_sdpa(text: &str) -> CliResult<SdpSystem> {
    let mut tokens = tokenize(text).into_iter();
    let mut next = |what: &str| tokens.next().ok_or_else(|| err(format!("unexpected end of input, expected {what}")));

    let m = parse_count(&next("the number of constraint matrices")?, "m")?;
    let blocks = parse_count(&next("the number of blocks")?, "number of blocks")?;
    let mut sizes = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let size = next("the block structure")?;
        let value: i64 = size.parse().map_err(|_| {
            err(format!("block structure entry {size:?} is not supported; only a single semidefinite block is"))
        })?;
        sizes.push(value);
    }
    if sizes.iter().any(|&s| s <= 0) {
        return Err(err(
            "diagonal blocks (linear or free variables) are not supported; only a single semidefinite block is",
        ));
    }
    let [n] = sizes[..] else {
        return Err(err(format!("{blocks} blocks given; only a single semidefinite block is supported")));
    };
    let n = n as usize;
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        rhs.push(parse_decimal(&next(&format!("c_{}", i + 1))?)?);
    }

    let mut mats = vec![RatMatrix::zeros(n, n); m];
    let mut seen = std::collections::HashSet::new();
    let rest: Vec<String> = tokens.collect();
    if rest.len() % 5 != 0 {
        return Err(err("entry lines must have exactly five fields: matrix block row column value"));
    }
    for entry in rest.chunks(5) {
        let mat = parse_index(&entry[0], "matrix number")?;
        let block = parse_index(&entry[1], "block number")?;
        let row = parse_index(&entry[2], "row")?;
        let col = parse_index(&entry[3], "column")?;
        let value = parse_decimal(&entry[4])?;
        if mat > m {
            return Err(err(format!("matrix number {mat} exceeds m = {m}")));
        }
        if block != 1 {
            return Err(err(format!("block number {block} does not exist")));
        }
        if row == 0 || col == 0 || row > n || col > n {
            return Err(err(format!("entry ({row}, {col}) lies outside the {n}x{n} block")));
        }
        let (i, j) = (row.min(col) - 1, row.max(col) - 1);
        if !seen.insert((mat, i, j)) {
            return Err(err(format!("duplicate entry ({row}, {col}) in matrix {mat}")));
        }
        if mat == 0 {
            continue;
        }
        mats[mat - 1][(i, j)] = value.clone();
        mats[mat - 1][(j, i)] = value;
    }
    let matrices = mats
        .into_iter()
        .map(|a| SymMatrix::new(a).expect("entries were mirrored"))
        .collect();
    SdpSystem::new(n, matrices, rhs).map_err(|e| err(e.to_string()))
}

fn err(message: impl ToString) -> CliError {
    CliError::parse(CTX, message)
}

/// Drops comment lines and the punctuation SDPA allows around numbers.
fn tokenize(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|line| !line.starts_with('"') && !line.starts_with('*'))
        .flat_map(|line| {
            line.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
                .filter(|t| !t.is_empty())
                .map(str::to_owned)
                .collect::<Vec<_>>()
        })
        .collect()
}

fn parse_count(token: &str, what: &str) -> CliResult<usize> {
    token.parse().map_err(|_| err(format!("{what} must be a nonnegative integer, got {token:?}")))
}

fn parse_index(token: &str, what: &str) -> CliResult<usize> {
    parse_count(token, what)
}

/// Exact value of a decimal literal such as `-1.25e-3`.
pub fn parse_decimal(token: &str) -> CliResult<Rational> {
    let bad = || err(format!("invalid number {token:?}"));
    if token.contains('/') {
        return Err(bad());
    }
    if let Some(pos) = token.find(['e', 'E']) {
        let exponent: i64 = token[pos + 1..].parse().map_err(|_| bad())?;
        if exponent.abs() > 10_000 {
            return Err(err(format!("exponent of {token:?} is out of range")));
        }
    }
    parse_rational(token).map_err(|_| bad())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("1.25").unwrap(), q(5, 4));
        assert_eq!(parse_decimal("-0.1").unwrap(), q(-1, 10));
        assert_eq!(parse_decimal("2.5e-3").unwrap(), q(1, 400));
        assert_eq!(parse_decimal("3E2").unwrap(), q(300, 1));
        assert_eq!(parse_decimal(".5").unwrap(), q(1, 2));
        assert_eq!(parse_decimal("+7.").unwrap(), q(7, 1));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("-").is_err());
    }

    #[test]
    fn reads_a_single_block_file() {
        let text = "\"a comment\"\n2\n1\n{2}\n{1.0, -0.5}\n0 1 1 1 3\n1 1 1 1 1\n2 1 1 2 0.5\n2 1 2 2 2\n";
        let sys = parse_sdpa(text).unwrap();
        assert_eq!(sys.order(), 2);
        assert_eq!(sys.rhs(), &[q(1, 1), q(-1, 2)]);
        assert_eq!(sys.matrix(1)[(1, 0)], q(1, 2));
        assert_eq!(sys.matrix(1)[(1, 1)], q(2, 1));
    }

    #[test]
    fn rejects_unsupported_structure() {
        assert!(parse_sdpa("").is_err());
        assert!(parse_sdpa("1\n2\n2 2\n1\n").is_err());
        assert!(parse_sdpa("1\n1\n-2\n1\n").is_err());
        assert!(parse_sdpa("1\n1\n2\n1\n1 1 3 1 1\n").is_err());
        assert!(parse_sdpa("1\n1\n2\n1\n1 1 1 1\n").is_err());
    }
}
