//! Tokenizer. Line and column information is kept per token; `#define`
//! bodies extend to the end of the physical line, so tokens also record
//! their line for the preprocessor.

use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Colon,
    ColonColon,
    Arrow,
    Assign, // :=
    Eq,     // =
    EqEq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    AndAnd,
    OrOr,
    Bang,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    PlusPlus,
    MinusMinus,
    Question,
    Hole, // ??
    DotDot,
    HashDefine,
    HashIf,
    HashEndif,
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Num(n) => write!(f, "{n}"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::Semi => write!(f, ";"),
            Tok::Comma => write!(f, ","),
            Tok::Colon => write!(f, ":"),
            Tok::ColonColon => write!(f, "::"),
            Tok::Arrow => write!(f, "->"),
            Tok::Assign => write!(f, ":="),
            Tok::Eq => write!(f, "="),
            Tok::EqEq => write!(f, "=="),
            Tok::Ne => write!(f, "!="),
            Tok::Le => write!(f, "<="),
            Tok::Ge => write!(f, ">="),
            Tok::Lt => write!(f, "<"),
            Tok::Gt => write!(f, ">"),
            Tok::AndAnd => write!(f, "&&"),
            Tok::OrOr => write!(f, "||"),
            Tok::Bang => write!(f, "!"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Slash => write!(f, "/"),
            Tok::Percent => write!(f, "%"),
            Tok::PlusPlus => write!(f, "++"),
            Tok::MinusMinus => write!(f, "--"),
            Tok::Question => write!(f, "?"),
            Tok::Hole => write!(f, "??"),
            Tok::DotDot => write!(f, ".."),
            Tok::HashDefine => write!(f, "#define"),
            Tok::HashIf => write!(f, "#if"),
            Tok::HashEndif => write!(f, "#endif"),
            Tok::Eof => write!(f, "<eof>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
    /// Byte offset of the first character, for adjacency checks.
    pub offset: usize,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $len:expr, $line:expr, $col:expr, $off:expr) => {{
            toks.push(Token {
                tok: $tok,
                line: $line,
                col: $col,
                offset: $off,
            });
            i += $len;
            col += $len as u32;
        }};
    }

    while i < bytes.len() {
        let c = bytes[i] as char;
        let (tline, tcol, toff) = (line, col, i);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '/' if bytes.get(i + 1) == Some(&b'*') => {
                i += 2;
                col += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(ParseError::new(tline, tcol, "unterminated block comment"));
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        col += 2;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                        col = 1;
                        i += 1;
                    } else {
                        i += 1;
                        col += 1;
                    }
                }
            }
            '#' => {
                let rest = &src[i..];
                if rest.starts_with("#define") {
                    push!(Tok::HashDefine, 7, tline, tcol, toff);
                } else if rest.starts_with("#endif") {
                    push!(Tok::HashEndif, 6, tline, tcol, toff);
                } else if rest.starts_with("#if") {
                    push!(Tok::HashIf, 3, tline, tcol, toff);
                } else {
                    return Err(ParseError::new(tline, tcol, "unknown directive"));
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = &src[start..i];
                col += (i - start) as u32;
                toks.push(Token {
                    tok: Tok::Ident(name.to_string()),
                    line: tline,
                    col: tcol,
                    offset: toff,
                });
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text = &src[start..i];
                col += (i - start) as u32;
                let n: i64 = text
                    .parse()
                    .map_err(|_| ParseError::new(tline, tcol, "integer literal out of range"))?;
                toks.push(Token {
                    tok: Tok::Num(n),
                    line: tline,
                    col: tcol,
                    offset: toff,
                });
            }
            '{' => push!(Tok::LBrace, 1, tline, tcol, toff),
            '}' => push!(Tok::RBrace, 1, tline, tcol, toff),
            '(' => push!(Tok::LParen, 1, tline, tcol, toff),
            ')' => push!(Tok::RParen, 1, tline, tcol, toff),
            '[' => push!(Tok::LBracket, 1, tline, tcol, toff),
            ']' => push!(Tok::RBracket, 1, tline, tcol, toff),
            ';' => push!(Tok::Semi, 1, tline, tcol, toff),
            ',' => push!(Tok::Comma, 1, tline, tcol, toff),
            ':' => {
                if bytes.get(i + 1) == Some(&b':') {
                    push!(Tok::ColonColon, 2, tline, tcol, toff);
                } else if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::Assign, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Colon, 1, tline, tcol, toff);
                }
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    push!(Tok::Arrow, 2, tline, tcol, toff);
                } else if bytes.get(i + 1) == Some(&b'-') {
                    push!(Tok::MinusMinus, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Minus, 1, tline, tcol, toff);
                }
            }
            '+' => {
                if bytes.get(i + 1) == Some(&b'+') {
                    push!(Tok::PlusPlus, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Plus, 1, tline, tcol, toff);
                }
            }
            '=' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::EqEq, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Eq, 1, tline, tcol, toff);
                }
            }
            '!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::Ne, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Bang, 1, tline, tcol, toff);
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::Le, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Lt, 1, tline, tcol, toff);
                }
            }
            '>' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::Ge, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Gt, 1, tline, tcol, toff);
                }
            }
            '&' => {
                if bytes.get(i + 1) == Some(&b'&') {
                    push!(Tok::AndAnd, 2, tline, tcol, toff);
                } else {
                    return Err(ParseError::new(tline, tcol, "expected '&&'"));
                }
            }
            '|' => {
                if bytes.get(i + 1) == Some(&b'|') {
                    push!(Tok::OrOr, 2, tline, tcol, toff);
                } else {
                    return Err(ParseError::new(tline, tcol, "expected '||'"));
                }
            }
            '*' => push!(Tok::Star, 1, tline, tcol, toff),
            '/' => push!(Tok::Slash, 1, tline, tcol, toff),
            '%' => push!(Tok::Percent, 1, tline, tcol, toff),
            '?' => {
                if bytes.get(i + 1) == Some(&b'?') {
                    push!(Tok::Hole, 2, tline, tcol, toff);
                } else {
                    push!(Tok::Question, 1, tline, tcol, toff);
                }
            }
            '.' => {
                if bytes.get(i + 1) == Some(&b'.') {
                    push!(Tok::DotDot, 2, tline, tcol, toff);
                } else {
                    return Err(ParseError::new(tline, tcol, "expected '..'"));
                }
            }
            other => {
                return Err(ParseError::new(
                    tline,
                    tcol,
                    format!("unexpected character '{other}'"),
                ));
            }
        }
    }
    toks.push(Token {
        tok: Tok::Eof,
        line,
        col,
        offset: src.len(),
    });
    Ok(toks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_operators_and_holes() {
        let toks = lex("x := ?? * 2; c?y").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|t| &t.tok).collect();
        assert_eq!(
            kinds,
            vec![
                &Tok::Ident("x".into()),
                &Tok::Assign,
                &Tok::Hole,
                &Tok::Star,
                &Tok::Num(2),
                &Tok::Semi,
                &Tok::Ident("c".into()),
                &Tok::Question,
                &Tok::Ident("y".into()),
                &Tok::Eof,
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        let toks = lex("a // comment\n/* b\nc */ d").unwrap();
        let names: Vec<String> = toks
            .iter()
            .filter_map(|t| match &t.tok {
                Tok::Ident(s) => Some(s.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(names, vec!["a", "d"]);
    }

    #[test]
    fn tracks_positions() {
        let toks = lex("a\n  b").unwrap();
        assert_eq!((toks[1].line, toks[1].col), (2, 3));
    }

    #[test]
    fn directives() {
        let toks = lex("#define N 4\n#if #endif").unwrap();
        assert_eq!(toks[0].tok, Tok::HashDefine);
        assert_eq!(toks[3].tok, Tok::HashIf);
        assert_eq!(toks[4].tok, Tok::HashEndif);
    }
}
