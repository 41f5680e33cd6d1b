use crate::task::TaskId;

pub const FIXTURE_FLAVORS: [&str; 3] = ["good", "adversarial", "perfect"];

/// Built-in scripted turns for `task`, one plan template per turn.
pub fn builtin_fixture(task: TaskId, flavor: &str) -> Option<Vec<&'static str>> {
    let turns: Vec<&'static str> = match (task, flavor) {
        (TaskId::Pentagon, "good") => vec![include_str!("../../fixtures/pentagon/good/turn_0.mplan")],
        (TaskId::Pentagon, "adversarial") => vec![include_str!("../../fixtures/pentagon/adversarial/turn_0.mplan"), include_str!("../../fixtures/pentagon/adversarial/turn_1.mplan"), include_str!("../../fixtures/pentagon/adversarial/turn_2.mplan")],
        (TaskId::Pentagon, "perfect") => vec![include_str!("../../fixtures/pentagon/perfect/turn_0.mplan")],
        (TaskId::Star, "good") => vec![include_str!("../../fixtures/star/good/turn_0.mplan")],
        (TaskId::Star, "adversarial") => vec![include_str!("../../fixtures/star/adversarial/turn_0.mplan"), include_str!("../../fixtures/star/adversarial/turn_1.mplan"), include_str!("../../fixtures/star/adversarial/turn_2.mplan")],
        (TaskId::Star, "perfect") => vec![include_str!("../../fixtures/star/perfect/turn_0.mplan")],
        (TaskId::Hash, "good") => vec![include_str!("../../fixtures/hash/good/turn_0.mplan")],
        (TaskId::Hash, "adversarial") => vec![include_str!("../../fixtures/hash/adversarial/turn_0.mplan"), include_str!("../../fixtures/hash/adversarial/turn_1.mplan"), include_str!("../../fixtures/hash/adversarial/turn_2.mplan")],
        (TaskId::Hash, "perfect") => vec![include_str!("../../fixtures/hash/perfect/turn_0.mplan")],
        (TaskId::Circle, "good") => vec![include_str!("../../fixtures/circle/good/turn_0.mplan")],
        (TaskId::Circle, "adversarial") => vec![include_str!("../../fixtures/circle/adversarial/turn_0.mplan"), include_str!("../../fixtures/circle/adversarial/turn_1.mplan"), include_str!("../../fixtures/circle/adversarial/turn_2.mplan")],
        (TaskId::Circle, "perfect") => vec![include_str!("../../fixtures/circle/perfect/turn_0.mplan")],
        (TaskId::Line, "good") => vec![include_str!("../../fixtures/line/good/turn_0.mplan")],
        (TaskId::Line, "adversarial") => vec![include_str!("../../fixtures/line/adversarial/turn_0.mplan"), include_str!("../../fixtures/line/adversarial/turn_1.mplan"), include_str!("../../fixtures/line/adversarial/turn_2.mplan")],
        (TaskId::Line, "perfect") => vec![include_str!("../../fixtures/line/perfect/turn_0.mplan")],
        (TaskId::Avoid, "good") => vec![include_str!("../../fixtures/avoid/good/turn_0.mplan")],
        (TaskId::Avoid, "adversarial") => vec![include_str!("../../fixtures/avoid/adversarial/turn_0.mplan"), include_str!("../../fixtures/avoid/adversarial/turn_1.mplan"), include_str!("../../fixtures/avoid/adversarial/turn_2.mplan")],
        (TaskId::Avoid, "perfect") => vec![include_str!("../../fixtures/avoid/perfect/turn_0.mplan")],
        _ => return None,
    };
    Some(turns)
}
