#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| friction_lab::fuzz_entry::rom_system_json(data));
