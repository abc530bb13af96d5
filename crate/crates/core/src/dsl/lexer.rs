use super::{DiagSeverity, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Word(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    At,
    Eq,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("'{w}'"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Semi => "';'".into(),
            Tok::Colon => "':'".into(),
            Tok::Comma => "','".into(),
            Tok::At => "'@'".into(),
            Tok::Eq => "'='".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn is_word_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn is_word_char(c: char) -> bool {
    is_word_start(c) || c == '-'
}

/// Whether `s` can be written without quotes.
pub(crate) fn is_bare_word(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_word_start(c) => chars.all(is_word_char),
        _ => false,
    }
}

pub(crate) struct LexDiag {
    pub pos: Pos,
    pub severity: DiagSeverity,
    pub message: String,
}

pub(crate) fn lex(source: &str) -> (Vec<Token>, Vec<LexDiag>) {
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    if chars.first() == Some(&'\u{feff}') {
        diags.push(LexDiag {
            pos: Pos { line: 1, col: 1, len: 1 },
            severity: DiagSeverity::Error,
            message: "byte order mark is not allowed; save the file as UTF-8 without BOM".into(),
        });
        i = 1;
    }
    let mut warned_cr = false;

    while i < chars.len() {
        let c = chars[i];
        let start = Pos { line, col, len: 1 };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            '\r' => {
                if !warned_cr {
                    diags.push(LexDiag {
                        pos: start,
                        severity: DiagSeverity::Warning,
                        message: "carriage return found; files should use LF line endings".into(),
                    });
                    warned_cr = true;
                }
                i += 1;
                col += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
                continue;
            }
            '"' => {
                let mut value = String::new();
                let mut j = i + 1;
                let mut ccol = col + 1;
                let mut closed = false;
                while j < chars.len() {
                    match chars[j] {
                        '"' => {
                            closed = true;
                            j += 1;
                            ccol += 1;
                            break;
                        }
                        '\n' => break,
                        '\\' => {
                            match chars.get(j + 1) {
                                Some('"') => value.push('"'),
                                Some('\\') => value.push('\\'),
                                other => {
                                    diags.push(LexDiag {
                                        pos: Pos { line, col: ccol, len: 2 },
                                        severity: DiagSeverity::Error,
                                        message: format!(
                                            "unknown escape sequence '\\{}'",
                                            other.map(|c| c.to_string()).unwrap_or_default()
                                        ),
                                    });
                                }
                            }
                            j += 2;
                            ccol += 2;
                        }
                        other => {
                            value.push(other);
                            j += 1;
                            ccol += 1;
                        }
                    }
                }
                if !closed {
                    diags.push(LexDiag {
                        pos: start,
                        severity: DiagSeverity::Error,
                        message: "unterminated string literal".into(),
                    });
                }
                tokens.push(Token {
                    tok: Tok::Str(value),
                    pos: Pos { line, col, len: ccol - col },
                });
                col = ccol;
                i = j;
                continue;
            }
            c if is_word_start(c) => {
                let mut j = i;
                while j < chars.len() && is_word_char(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let len = (j - i) as u32;
                tokens.push(Token {
                    tok: Tok::Word(word),
                    pos: Pos { line, col, len },
                });
                col += len;
                i = j;
                continue;
            }
            _ => {}
        }
        let tok = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ';' => Some(Tok::Semi),
            ':' => Some(Tok::Colon),
            ',' => Some(Tok::Comma),
            '@' => Some(Tok::At),
            '=' => Some(Tok::Eq),
            _ => None,
        };
        match tok {
            Some(tok) => tokens.push(Token { tok, pos: start }),
            None => diags.push(LexDiag {
                pos: start,
                severity: DiagSeverity::Error,
                message: format!("unexpected character {c:?}"),
            }),
        }
        i += 1;
        col += 1;
    }
    tokens.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col, len: 0 },
    });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        lex(src).0.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn words_strings_and_punctuation() {
        assert_eq!(
            kinds("tech H2-Storage@l2 { in: \"sea water\"; } # trailing"),
            vec![
                Tok::Word("tech".into()),
                Tok::Word("H2-Storage".into()),
                Tok::At,
                Tok::Word("l2".into()),
                Tok::LBrace,
                Tok::Word("in".into()),
                Tok::Colon,
                Tok::Str("sea water".into()),
                Tok::Semi,
                Tok::RBrace,
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let (toks, _) = lex("hub\n  \"x\" {");
        assert_eq!((toks[0].pos.line, toks[0].pos.col, toks[0].pos.len), (1, 1, 3));
        assert_eq!((toks[1].pos.line, toks[1].pos.col, toks[1].pos.len), (2, 3, 3));
        assert_eq!((toks[2].pos.line, toks[2].pos.col), (2, 7));
    }

    #[test]
    fn escapes_and_bom() {
        let (toks, diags) = lex("\u{feff}\"a\\\"b\\\\c\"");
        assert_eq!(toks[0].tok, Tok::Str("a\"b\\c".into()));
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("byte order mark"));
    }

    #[test]
    fn unterminated_string_and_stray_chars() {
        let (_, diags) = lex("\"abc\n$");
        let msgs: Vec<_> = diags.iter().map(|d| d.message.as_str()).collect();
        assert!(msgs[0].contains("unterminated"));
        assert!(msgs[1].contains("unexpected character"));
    }

    #[test]
    fn bare_word_rule() {
        assert!(is_bare_word("H2-Storage"));
        assert!(is_bare_word("CO2"));
        assert!(!is_bare_word("sea water"));
        assert!(!is_bare_word("-x"));
        assert!(!is_bare_word(""));
        assert!(!is_bare_word("a@b"));
    }
}
