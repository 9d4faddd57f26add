//! Line-oriented reading shared by every text input format.

use thiserror::Error;

/// Lenient readers skip `#` comments and blank lines; strict readers reject
/// them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ParseMode {
    #[default]
    Lenient,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind} not allowed in strict mode")]
pub struct StrictViolation {
    pub line: usize,
    pub kind: &'static str,
}

/// Iterator over `(1-based line number, trimmed record)`.
pub struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    mode: ParseMode,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str, mode: ParseMode) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            mode,
        }
    }
}

impl<'a> Iterator for Lines<'a> {
    type Item = Result<(usize, &'a str), StrictViolation>;

    fn next(&mut self) -> Option<Self::Item> {
        for (idx, raw) in self.inner.by_ref() {
            let line = idx + 1;
            let trimmed = raw.trim();
            let kind = if trimmed.is_empty() {
                "blank line"
            } else if trimmed.starts_with('#') {
                "comment"
            } else {
                return Some(Ok((line, trimmed)));
            };
            if self.mode == ParseMode::Strict {
                return Some(Err(StrictViolation { line, kind }));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lenient_skips_and_numbers_lines() {
        let got: Vec<_> = Lines::new("# x\n\na\r\n  b  \n", ParseMode::Lenient)
            .map(Result::unwrap)
            .collect();
        assert_eq!(got, vec![(3, "a"), (4, "b")]);
    }

    #[test]
    fn strict_rejects_comments() {
        let mut it = Lines::new("a\n# x\n", ParseMode::Strict);
        assert_eq!(it.next(), Some(Ok((1, "a"))));
        assert_eq!(
            it.next(),
            Some(Err(StrictViolation {
                line: 2,
                kind: "comment"
            }))
        );
    }
}
