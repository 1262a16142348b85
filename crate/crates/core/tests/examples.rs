macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }

        #[test]
        fn $name() {
            $name::run().expect(concat!(stringify!($name), " example should run"));
        }
    };
}

example!(reference_trajectory);
example!(blood_rheology);
example!(grid_flow_import);
example!(factorial_sweep);
example!(gradient_maps);
example!(predictive_fit);
example!(constant_replay);
example!(oracle_suite);
