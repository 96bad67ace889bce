//! Deck serialization to Markdown or JSON.

use std::fmt::Write as _;
use std::str::FromStr;

use super::SlideDeck;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Markdown,
    Json,
}

impl FromStr for RenderFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(RenderFormat::Markdown),
            "json" => Ok(RenderFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown format `{other}` (expected markdown or json)"
            ))),
        }
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn render_markdown(deck: &SlideDeck) -> String {
    let mut out = String::new();
    writeln!(out, "<!-- deck: {} -->", one_line(&deck.doc_id)).unwrap();
    for slide in &deck.slides {
        writeln!(out).unwrap();
        writeln!(out, "## {}", one_line(&slide.title)).unwrap();
        writeln!(out).unwrap();
        for item in &slide.items {
            for phrase in &item.phrases {
                writeln!(out, "- {}", phrase.text()).unwrap();
            }
            writeln!(out, "  - {}", one_line(&item.sentence.text)).unwrap();
        }
    }
    out
}

pub fn render(deck: &SlideDeck, format: RenderFormat) -> Result<Vec<u8>> {
    match format {
        RenderFormat::Markdown => Ok(render_markdown(deck).into_bytes()),
        RenderFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(deck)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn parse_deck_json(bytes: &[u8]) -> Result<SlideDeck> {
    Ok(serde_json::from_slice(bytes)?)
}
