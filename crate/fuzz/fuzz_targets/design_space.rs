#![no_main]

use archex::space::DesignSpace;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(space) = serde_json::from_slice::<DesignSpace>(data) else { return };
    let text = serde_json::to_string(&space).expect("space serializes");
    let again: DesignSpace = serde_json::from_str(&text).expect("serialized space reparses");
    assert_eq!(again, space);
    let n = space.cardinality();
    assert!(n >= 1);
    if n <= 4096 {
        assert_eq!(space.enumerate().count() as u128, n);
    }
});
