use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Ratings laid out items × users. Unrated cells are exactly 0.
#[derive(Debug, Clone)]
pub struct RatingsMatrix {
    pub x: DenseMatrix,
    /// Row labels, ascending.
    pub item_ids: Vec<u64>,
    /// Column labels, ascending.
    pub user_ids: Vec<u64>,
}

const HEADER: [&str; 4] = ["userId", "movieId", "rating", "timestamp"];

/// Reads a MovieLens `ratings.csv` into a movies × users matrix. If a
/// (user, movie) pair appears more than once, the last occurrence wins.
pub fn load_movielens(path: impl AsRef<Path>) -> Result<RatingsMatrix> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_movielens(file)
}

pub fn parse_movielens(input: impl Read) -> Result<RatingsMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = reader.records();

    let header = match records.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty ratings file".into(),
            })
        }
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    if header.iter().ne(HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`", HEADER.join(",")),
        });
    }

    let mut ratings: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 4 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 4 fields, found {}", rec.len()),
            });
        }
        let field = |k: usize| -> Result<&str> { Ok(&rec[k]) };
        let parse_id = |k: usize| -> Result<u64> {
            field(k)?.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid {} `{}`", HEADER[k], &rec[k]),
            })
        };
        let user = parse_id(0)?;
        let movie = parse_id(1)?;
        let rating: f64 = rec[2].parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid rating `{}`", &rec[2]),
        })?;
        if !(rating >= 0.0 && rating.is_finite()) {
            return Err(Error::Parse {
                line,
                msg: format!("rating {rating} is not a finite nonnegative number"),
            });
        }
        ratings.insert((movie, user), rating);
    }
    if ratings.is_empty() {
        return Err(Error::Parse {
            line: 2,
            msg: "ratings file has a header but no ratings".into(),
        });
    }

    let mut item_ids: Vec<u64> = ratings.keys().map(|&(m, _)| m).collect();
    item_ids.dedup();
    let mut user_ids: Vec<u64> = ratings.keys().map(|&(_, u)| u).collect();
    user_ids.sort_unstable();
    user_ids.dedup();
    let col_of: BTreeMap<u64, usize> = user_ids.iter().enumerate().map(|(j, &u)| (u, j)).collect();

    let mut x = DenseMatrix::zeros(item_ids.len(), user_ids.len());
    let mut row = 0;
    let mut current = item_ids[0];
    for (&(movie, user), &v) in &ratings {
        if movie != current {
            row += 1;
            current = movie;
        }
        x.set(row, col_of[&user], v);
    }
    Ok(RatingsMatrix {
        x,
        item_ids,
        user_ids,
    })
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}
