// Reference values frozen from an independent 52-bit generator run:
// (point index, coordinate, exact dyadic value).
const FROZEN: &[(u64, usize, f64)] = &[
    (1, 0, 0.5),
    (1, 1, 0.5),
    (1, 9, 0.5),
    (1, 31, 0.5),
    (1, 49, 0.5),
    (2, 0, 0.75),
    (2, 1, 0.25),
    (2, 9, 0.75),
    (2, 31, 0.25),
    (2, 49, 0.75),
    (3, 0, 0.25),
    (3, 1, 0.75),
    (3, 9, 0.25),
    (3, 31, 0.75),
    (3, 49, 0.25),
    (7, 0, 0.125),
    (7, 1, 0.625),
    (7, 9, 0.875),
    (7, 31, 0.875),
    (7, 49, 0.125),
    (64, 0, 0.0234375),
    (64, 1, 0.3984375),
    (64, 9, 0.1171875),
    (64, 31, 0.8046875),
    (64, 49, 0.8671875),
    (100, 0, 0.4140625),
    (100, 1, 0.2578125),
    (100, 9, 0.6953125),
    (100, 31, 0.4140625),
    (100, 49, 0.6640625),
    (1000, 0, 0.2197265625),
    (1000, 1, 0.0966796875),
    (1000, 9, 0.0693359375),
    (1000, 31, 0.1455078125),
    (1000, 49, 0.4794921875),
    (4095, 0, 0.000244140625),
    (4095, 1, 0.941162109375),
    (4095, 9, 0.246337890625),
    (4095, 31, 0.087646484375),
    (4095, 49, 0.607666015625),
];
