#![no_main]

use deckgen::document::parse_slides;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(slides) = parse_slides(text) {
        assert!(!slides.sentences.is_empty());
    }
});
