mod common;

use common::props::{closure_properties, overapproximates};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn template_overapproximates_existential_abstraction(case in common::gen::int_case()) {
        overapproximates(&case, 2)?;
        let d = overapproximates(&case, 3)?;
        closure_properties(&d, 3)?;
    }
}
