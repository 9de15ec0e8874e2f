#![no_main]

use deckgen::salience::MlpModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = MlpModel::from_json(text) {
        let row = vec![0.0; model.schema().width()];
        let _ = model.predict_row(&row);
    }
});
