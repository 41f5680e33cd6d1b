use std::fmt::Write;

use super::{FeedbackReport, Message};
use crate::draw::{BoardGeometry, CameraModel};
use crate::dsl::GRAMMAR_DOC;
use crate::nlp::Domain;
use crate::scene::{Frame, SceneState, TABLE_BOUNDS};
use crate::task::TaskId;

const ROLE: &str = "You are a franka panda robot operating in an environment with the following state:";

const DRAW_SQUARE: &str = "\
params {
  pos = [0.22, 0.14];
  size = 0.2;
  offsets = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
}
plan {
  draw_line(pos[0] + offsets[0], pos[1] + offsets[1], pos[0] + size + offsets[2], pos[1] + offsets[3]);
  draw_line(pos[0] + size + offsets[2], pos[1] + offsets[3], pos[0] + size + offsets[4], pos[1] + size + offsets[5]);
  draw_line(pos[0] + size + offsets[4], pos[1] + size + offsets[5], pos[0] + offsets[6], pos[1] + size + offsets[7]);
  draw_line(pos[0] + offsets[6], pos[1] + size + offsets[7], pos[0] + offsets[0], pos[1] + offsets[1]);
}
";

const DRAW_PLUS: &str = "\
params {
  pos = [0.32, 0.24];
  size = 0.16;
  offsets = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
}
plan {
  draw_line(pos[0] - size / 2 + offsets[0], pos[1] + offsets[1], pos[0] + size / 2 + offsets[2], pos[1] + offsets[3]);
  draw_line(pos[0] + offsets[4], pos[1] - size / 2 + offsets[5], pos[0] + offsets[6], pos[1] + size / 2 + offsets[7]);
}
";

const PUSH_TO_TARGET: &str = "\
params {
  a = [0.0, 0.0, 0.0, 0.0];
  b = [0.0, 0.0, 0.0, 0.0];
}
plan {
  # first push brings the block close to the target
  push_motion(frame(\"big_red_block\").x_pos - 0.3 + a[0], frame(\"big_red_block\").y_pos + a[1],
              frame(\"target_pose\").x_pos - 0.1 + a[2], frame(\"target_pose\").y_pos + a[3]);
  # second push adjusts the final position
  push_motion(frame(\"target_pose\").x_pos - 0.2 + b[0], frame(\"target_pose\").y_pos + b[1],
              frame(\"target_pose\").x_pos - 0.05 + b[2], frame(\"target_pose\").y_pos + b[3]);
}
";

const PUSH_SIDE_BY_SIDE: &str = "\
params {
  gap = 0.01;
  shift = [0.0, 0.0];
}
plan {
  push_motion(frame(\"block_green\").x_pos + 0.08, frame(\"block_green\").y_pos + shift[0],
              frame(\"block_red\").x_pos + frame(\"block_red\").size[0] + gap + frame(\"block_green\").size[0] / 2,
              frame(\"block_green\").y_pos + shift[0]);
  push_motion(frame(\"block_blue\").x_pos + 0.08, frame(\"block_blue\").y_pos + shift[1],
              frame(\"block_red\").x_pos + 2 * (frame(\"block_red\").size[0] + gap) + frame(\"block_blue\").size[0] / 2,
              frame(\"block_blue\").y_pos + shift[1]);
}
";

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", items.join(", "))
}

fn frame_text(f: &Frame) -> String {
    format!(
        "Frame(name=\"{}\", x_pos={}, y_pos={}, z_pos={}, x_rot={}, y_rot={}, z_rot={}, size={}, color={})",
        f.name,
        f.x_pos,
        f.y_pos,
        f.z_pos,
        f.x_rot,
        f.y_rot,
        f.z_rot,
        fmt_list(&f.size),
        fmt_list(&f.color)
    )
}

fn state_text(domain: Domain, scene: &SceneState) -> String {
    let frames: Vec<String> = scene.frames.iter().map(frame_text).collect();
    let kind = match domain {
        Domain::Draw => "DrawState",
        Domain::Push => "PushState",
    };
    format!("{kind}(frames=[{}])", frames.join(", "))
}

/// An assistant turn carrying a template in a fenced block.
pub fn render_template_turn(source: &str) -> String {
    format!("```mplan\n{}\n```", source.trim_end())
}

fn environment(domain: Domain) -> String {
    let mut s = String::new();
    match domain {
        Domain::Draw => {
            let b = BoardGeometry::default();
            let c = CameraModel::default();
            let _ = writeln!(
                s,
                "The whiteboard is bounded in the x-direction between 0 and {}, and in the y-direction between 0 and {}.",
                b.width, b.height
            );
            let _ = writeln!(
                s,
                "The whiteboards world position is at ({:.1}, {}, {}).",
                b.center_world[0], b.center_world[1], b.center_world[2]
            );
            let _ = writeln!(s, "The whiteboard is tilted by {} degrees.", b.tilt_deg);
            let _ = writeln!(
                s,
                "A camera, positioned at ({:.1}, {}, {}), looks downward parallel to the world x-y plane.",
                c.position[0], c.position[1], c.position[2]
            );
            let _ = writeln!(
                s,
                "The camera image is {}x{} pixels with a focal length of {} pixels. All costs are measured in that image.",
                c.image_size[0], c.image_size[1], c.focal_px
            );
        }
        Domain::Push => {
            let t = TABLE_BOUNDS;
            let _ = writeln!(
                s,
                "TABLE_BOUNDS = [[{}, {}], [{}, {}], [0, 0]]  # X Y Z",
                t[0][0], t[0][1], t[1][0], t[1][1]
            );
            let _ = writeln!(s, "TABLE_CENTER = [0, 0, 0]");
            let _ = writeln!(
                s,
                "Frames have the fields name, x_pos, y_pos, z_pos, x_rot, y_rot, z_rot, size and color. \
                 Positions are meters; size lists the extents along the frame's own axes."
            );
            let _ = writeln!(
                s,
                "Blocks slide without rotating when the pusher touches one of their faces. Walls never move."
            );
        }
    }
    s
}

fn skills(domain: Domain) -> &'static str {
    match domain {
        Domain::Draw => {
            "You have access to the following skill. You have no other skills you can use, and you must \
exactly follow the number of inputs described below.
The coordinate system is defined relative to the whiteboard, using x and y axes. The x-axis runs \
horizontally along the whiteboard, while the y-axis runs vertically on it. The origin (0, 0) is located \
at the lower-left corner of the whiteboard.

draw_line(x0, y0, x1, y1)   [4 arguments]
Draw a line on the whiteboard, x0, y0 being the start point of the line in whiteboard coordinates, x1, y1 the endpoint.

To compensate for the tilted drawing surface and ensure a flat appearance in the top-down camera view, \
apply 2D offsets to each point, initialized to zero."
        }
        Domain::Push => {
            "You have access to the following skill. You have no other skills you can use, and you must \
exactly follow the number of inputs described below.
The coordinate axes are x, y, z where x is left/right from the robot base, y the distance from the \
robot base, and z is the height off the table.

push_motion(start_x, start_y, end_x, end_y)   [4 arguments]
Perform a push motion along the straight 2D path defined by the start and end points. Between two \
pushes the pusher is lifted, so it only touches blocks while a push is executing."
        }
    }
}

fn examples(domain: Domain) -> [(&'static str, &'static str, &'static str); 2] {
    match domain {
        Domain::Draw => [
            (
                "DrawState(frames=[])",
                "Draw a square on the tilted whiteboard with side lengths of 20cm.",
                DRAW_SQUARE,
            ),
            (
                "DrawState(frames=[])",
                "Draw a plus sign on the tilted whiteboard with arms of 16cm.",
                DRAW_PLUS,
            ),
        ],
        Domain::Push => [
            (
                "PushState(frames=[Frame(name=\"big_red_block\", x_pos=-0.2, y_pos=0.3, z_pos=0.7, x_rot=0, y_rot=0, z_rot=0, size=[0.1, 0.2, 0.1, 0], color=[204, 51, 63]), \
Frame(name=\"target_pose\", x_pos=0.4, y_pos=0.3, z_pos=0.7, x_rot=0, y_rot=0, z_rot=0, size=[0.1, 0.2, 0.1, 0], color=[0, 255, 0])])",
                "Push the red block to the target pose.",
                PUSH_TO_TARGET,
            ),
            (
                "PushState(frames=[Frame(name=\"block_red\", x_pos=0, y_pos=0, z_pos=0.71, x_rot=0, y_rot=0, z_rot=0, size=[0.04, 0.04, 0.12, 0], color=[255, 0, 0]), \
Frame(name=\"block_green\", x_pos=0.15, y_pos=0.05, z_pos=0.71, x_rot=0, y_rot=0, z_rot=0, size=[0.04, 0.04, 0.12, 0], color=[0, 255, 0]), \
Frame(name=\"block_blue\", x_pos=0.3, y_pos=-0.05, z_pos=0.71, x_rot=0, y_rot=0, z_rot=0, size=[0.04, 0.04, 0.12, 0], color=[0, 0, 255])])",
                "Push the green and blue blocks so that all three blocks sit next to each other.",
                PUSH_SIDE_BY_SIDE,
            ),
        ],
    }
}

/// System and user messages for `task`, followed by one (assistant,
/// feedback) pair per earlier attempt.
pub fn build_prompt(task: TaskId, scene: &SceneState, history: &[(String, FeedbackReport)]) -> Vec<Message> {
    let domain = task.domain();
    let mut system = String::new();
    let _ = writeln!(system, "{ROLE}\n");
    let _ = writeln!(system, "{}", environment(domain));
    let _ = writeln!(system, "{}\n", skills(domain));
    let _ = writeln!(
        system,
        "Your goal is to write a plan template in the language described below. Declare every \
continuous quantity the optimizer may tune as a parameter with an initial guess; the optimizer \
adjusts those values to minimize the task cost. Answer with exactly one fenced code block.\n"
    );
    let _ = writeln!(system, "{GRAMMAR_DOC}");
    let _ = writeln!(system, "Below are two examples for other tasks and successful solutions.\n");
    for (state, goal, template) in examples(domain) {
        let _ = writeln!(system, "# user message\nState: {state}\nGoal: {goal}\n");
        let _ = writeln!(system, "# assistant message\n{}\n", render_template_turn(template));
    }

    let mut messages = vec![
        Message::system(system.trim_end()),
        Message::user(format!("State: {}\nGoal: {}", state_text(domain, scene), task.goal())),
    ];
    for (template, report) in history {
        messages.push(Message::assistant(render_template_turn(template)));
        messages.push(Message::user(report.render()));
    }
    messages
}
