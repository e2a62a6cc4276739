#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ukcenter::generate::{random_instance, Shape};
use ukcenter::{Instance, Scalar, Settings};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn instance<T: Scalar>(seed: u64, max: &Shape) -> Instance<T> {
    let mut rng = rng(seed);
    let shape = Shape::sample(&mut rng, max);
    random_instance(&mut rng, &shape, Settings::default()).unwrap()
}

pub fn shape(vertices: usize, edges: usize, points: usize, locations: usize) -> Shape {
    Shape {
        vertices,
        edges,
        points,
        locations,
    }
}
