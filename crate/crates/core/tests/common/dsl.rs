use std::path::PathBuf;

use mops::dsl::{self, DslError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/templates");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "mplan"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

pub fn corpus_round_trips() {
    let corpus = corpus();
    assert_eq!(corpus.len(), 20);
    for (name, text) in corpus {
        let a = dsl::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = dsl::print(&a);
        let b = dsl::parse(&printed).unwrap_or_else(|e| panic!("{name} reprint: {e}\n{printed}"));
        assert!(a.same_program(&b), "{name}\n{printed}");
        // printing is a fixed point after one pass
        assert_eq!(dsl::print(&b), printed, "{name}");
    }
}

pub fn malformed_inputs_report_positions() {
    let cases: [(&str, usize, usize); 10] = [
        ("plan { draw_line(0, 0, 1, 1) }", 1, 30),
        ("plan { draw_line(0, 0, 1, 1; }", 1, 28),
        ("params { a = ; }\nplan { }", 1, 14),
        ("params { a = 1 }\nplan { }", 1, 16),
        ("plan {\n  draw_line(0, 0, 1 +, 1);\n}", 2, 22),
        ("plan {\n  draw_line(0, 0, 1, 1);\n", 3, 1),
        ("params { a = [1, 2,]; }\nplan { }", 1, 20),
        ("plan { draw_line(0, 0, frame(\"a\").x_pos, 1 $ 2); }", 1, 44),
        ("plan { draw_line(0, (0, 1, 1); }", 1, 23),
        ("params { a = 1; }", 1, 18),
    ];
    for (text, line, column) in cases {
        match dsl::parse(text) {
            Err(DslError::Syntax { line: l, column: c, message }) => {
                assert_eq!((l, c), (line, column), "{text:?}: {message}");
                assert!(!message.is_empty());
            }
            other => panic!("{text:?}: expected a syntax error, got {other:?}"),
        }
    }
}

pub const VOCAB: &[&str] = &[
    "params", "plan", "{", "}", "(", ")", "[", "]", ";", ",", "=", "+", "-", "*", "/", ".", "0", "1.5", "-2",
    "1e3", "1e", "pi", "a", "b", "offsets", "sin", "cos", "sqrt", "abs", "min", "max", "frame", "\"a\"", "\"",
    "x_pos", "size", "color", "draw_line", "push_motion", "pick", "place_sr", "#", "\n", "$", "@", "é", "",
];

pub fn random_stream(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(0..40);
    let mut s = String::new();
    for _ in 0..len {
        s.push_str(VOCAB[rng.random_range(0..VOCAB.len())]);
        if rng.random_bool(0.7) {
            s.push(' ');
        }
    }
    s
}

pub fn fuzzed_token_streams_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut accepted = 0;
    for _ in 0..10_000 {
        let text = random_stream(&mut rng);
        match dsl::parse(&text) {
            Ok(t) => {
                accepted += 1;
                assert!(dsl::parse(&dsl::print(&t)).unwrap().same_program(&t), "{text:?}");
            }
            Err(DslError::Syntax { line, column, .. }) => assert!(line >= 1 && column >= 1, "{text:?}"),
            Err(_) => {}
        }
    }
    assert!(accepted < 10_000);
}

pub fn fuzzed_valid_prefixes_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let corpus = corpus();
    for _ in 0..2_000 {
        let (_, text) = &corpus[rng.random_range(0..corpus.len())];
        let bytes: Vec<char> = text.chars().collect();
        let cut = rng.random_range(0..=bytes.len());
        let mut s: String = bytes[..cut].iter().collect();
        s.push_str(VOCAB[rng.random_range(0..VOCAB.len())]);
        let _ = dsl::parse(&s);
    }
}
