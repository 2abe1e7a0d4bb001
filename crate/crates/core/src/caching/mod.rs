//! Content demand, serving-set selection and the average-rate objective.

mod demand;
mod influence;
mod objective;
mod placement;

pub use demand::{zipf_pmf, DemandModel};
pub use influence::{influence_scores, influential_car, select_serving_motif, FrequencyNormalization, InfluenceTable};
pub use objective::{evaluate, objective_value, Evaluation, RequesterOutcome, Scene};
pub use placement::{
    assign_nearest, distance_cost, exhaustive_best_objective, select_serving_location, Placement, EXHAUSTIVE_LIMIT,
};

pub(crate) fn combinations(n: usize, c: usize, mut visit: impl FnMut(&[usize])) {
    if c > n {
        return;
    }
    let mut idx: Vec<usize> = (0..c).collect();
    loop {
        visit(&idx);
        // advance to the next combination in lexicographic order
        let mut i = c;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - c {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..c {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
