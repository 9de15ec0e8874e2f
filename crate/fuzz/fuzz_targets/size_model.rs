#![no_main]

use deckgen::selection::{PaperStats, SizeModel};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = SizeModel::from_json(text) {
        let _ = model.evaluate(&PaperStats([1.0; 7]));
    }
});
