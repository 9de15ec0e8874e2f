#![no_main]

use deckgen::document::parse_paper;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(paper) = parse_paper(text) {
        for (k, s) in paper.sentence_stream().iter().enumerate() {
            assert_eq!(s.global_index, k);
        }
        let _ = paper.total_chars();
        let _ = paper.dangling_refs().count();
    }
});
