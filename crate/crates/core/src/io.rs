//! Game files.
//!
//! Two on-disk forms are supported:
//!
//! - JSON: `{"players": n, "order": "paper"|"bitmask", "values": [strings]}`
//!   where each value string is an integer `"k"` or a reduced fraction
//!   `"p/q"`. Bitmask order lists masks 1..2ⁿ−1 ascending.
//! - plain text: whitespace-separated value strings; the player count is
//!   inferred from the vector length 2ⁿ−1.
//!
//! Readers normalize fractions; writers emit lowest terms.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{Game, GameError};
use crate::rational::{parse_rational, ParseRationalError, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueOrder {
    Paper,
    Bitmask,
}

impl ValueOrder {
    fn as_str(&self) -> &'static str {
        match self {
            ValueOrder::Paper => "paper",
            ValueOrder::Bitmask => "bitmask",
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON game file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown value order `{0}` (expected `paper` or `bitmask`)")]
    UnknownOrder(String),
    #[error("bad value at position {index}: {source}")]
    BadValue {
        index: usize,
        source: ParseRationalError,
    },
    #[error("{0}")]
    Game(#[from] GameError),
    #[error("empty game file")]
    Empty,
    #[error("a vector of {0} values is not of length 2^n - 1 for any n")]
    NotAPowerLength(usize),
}

#[derive(Serialize, Deserialize)]
struct GameFile {
    players: usize,
    order: String,
    values: Vec<String>,
}

fn parse_values(raw: &[String]) -> Result<Vec<Rational>, IoError> {
    raw.iter()
        .enumerate()
        .map(|(index, s)| parse_rational(s).map_err(|source| IoError::BadValue { index, source }))
        .collect()
}

fn assemble(players: usize, order: ValueOrder, values: Vec<Rational>) -> Result<Game, IoError> {
    let game = match order {
        ValueOrder::Paper => Game::from_paper_order(players, values)?,
        ValueOrder::Bitmask => Game::from_bitmask_order(players, values)?,
    };
    Ok(game)
}

/// Reads a JSON game file.
pub fn read_game_json(text: &str) -> Result<Game, IoError> {
    let file: GameFile = serde_json::from_str(text)?;
    let order = match file.order.as_str() {
        "paper" => ValueOrder::Paper,
        "bitmask" => ValueOrder::Bitmask,
        other => return Err(IoError::UnknownOrder(other.to_string())),
    };
    assemble(file.players, order, parse_values(&file.values)?)
}

/// Reads a plain whitespace-separated vector; `n` is inferred from the
/// length.
pub fn read_game_vector(text: &str, order: ValueOrder) -> Result<Game, IoError> {
    let raw: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if raw.is_empty() {
        return Err(IoError::Empty);
    }
    let len = raw.len();
    let n = infer_player_count(len).ok_or(IoError::NotAPowerLength(len))?;
    assemble(n, order, parse_values(&raw)?)
}

/// Reads either format: JSON if the text starts with `{`, otherwise a plain
/// vector in the given order.
pub fn read_game(text: &str, order: ValueOrder) -> Result<Game, IoError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        read_game_json(text)
    } else {
        read_game_vector(text, order)
    }
}

/// Solves 2ⁿ − 1 = len.
pub fn infer_player_count(len: usize) -> Option<usize> {
    let mut n = 1usize;
    while n <= crate::coalition::MAX_PLAYERS {
        if (1usize << n) - 1 == len {
            return Some(n);
        }
        n += 1;
    }
    None
}

/// Serializes a game as a JSON game file.
pub fn write_game_json(game: &Game, order: ValueOrder) -> String {
    let values = match order {
        ValueOrder::Paper => game.to_paper_order(),
        ValueOrder::Bitmask => game.to_bitmask_order(),
    };
    let file = GameFile {
        players: game.n(),
        order: order.as_str().to_string(),
        values: values.iter().map(|v| v.to_string()).collect(),
    };
    serde_json::to_string_pretty(&file).expect("game file serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn json_round_trip_both_orders() {
        let g = Game::from_paper_order(3, (1..=7).map(rat).collect()).unwrap();
        for order in [ValueOrder::Paper, ValueOrder::Bitmask] {
            let text = write_game_json(&g, order);
            let back = read_game_json(&text).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn plain_vector_infers_player_count() {
        let g = read_game_vector("0 0 0 3 1 2 3", ValueOrder::Paper).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.to_string(), "0 0 0 3 1 2 3");
        assert!(matches!(
            read_game_vector("1 2", ValueOrder::Paper),
            Err(IoError::NotAPowerLength(2))
        ));
    }

    #[test]
    fn fractions_are_normalized_on_read() {
        let g = read_game_vector("2/4 0 1", ValueOrder::Paper).unwrap();
        assert_eq!(g.to_paper_order()[0].to_string(), "1/2");
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(read_game_json("{\"players\": 2}").is_err());
        assert!(matches!(
            read_game_json(
                "{\"players\": 2, \"order\": \"sideways\", \"values\": [\"1\",\"2\",\"3\"]}"
            ),
            Err(IoError::UnknownOrder(_))
        ));
        assert!(matches!(
            read_game("1/0 0 0", ValueOrder::Paper),
            Err(IoError::BadValue { index: 0, .. })
        ));
        assert!(matches!(
            read_game("  ", ValueOrder::Paper),
            Err(IoError::Empty)
        ));
    }

    #[test]
    fn autodetects_json_by_leading_brace() {
        let g = Game::zero(2);
        let text = write_game_json(&g, ValueOrder::Paper);
        assert_eq!(read_game(&text, ValueOrder::Paper).unwrap(), g);
    }
}
