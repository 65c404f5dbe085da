#pragma once

#include <string_view>

namespace awm {

// Workflow induction instruction, version 1. Shipped verbatim as
// assets/induction_prompt_v1.txt; keep the two copies byte-identical.
inline constexpr std::string_view kInductionPromptV1 =
    "Given a list of web navigation tasks, your task is to extract the common workflows.\n"
    "Each given task contains a natural language instruction, and a series of actions to solve the task. "
    "You need to find the repetitive subset of actions across multiple tasks, and extract each of them out as a workflow.\n"
    "Each workflow should be a commonly reused sub-routine of the tasks. "
    "Do not generate similar or overlapping workflows. "
    "Each workflow should have at least two steps. "
    "Represent the non-fixed elements (input text, button strings) with descriptive variable names as shown in the example.\n";

// Built-in action documentation: the base agent memory before any workflows.
inline constexpr std::string_view kDefaultActionDocs =
    "You can interact with the page through the following actions.\n"
    "Element ids are the bracketed numbers shown in the observation.\n"
    "\n"
    "click('id')                    click the element with the given id\n"
    "fill('id', 'text')             set the value of a textbox\n"
    "type('id', 'text')             same as fill\n"
    "hover('id')                    hover over an element\n"
    "press('id', 'key')             press a key while the element is focused\n"
    "select_option('id', 'option')  choose an option in a select element\n"
    "send_msg_to_user('message')    report a result to the user and finish\n"
    "stop()                         finish without a message\n";

// Stepwise prediction adds a candidate-element convention on top of the docs.
inline constexpr std::string_view kStepwiseInstruction =
    "Choose the next action. The observation lists the candidate elements; "
    "reference elements by their bracketed id.\n";

inline constexpr std::string_view kAgentReplyInstruction =
    "Respond with one line of reasoning, then one line containing exactly one "
    "action call.\n";

inline constexpr std::string_view kAgentRetryReminder =
    "Your previous reply contained no valid action. Respond again and emit "
    "exactly one action line.\n";

inline constexpr std::string_view kJudgeInstruction =
    "You are evaluating whether a web navigation task was completed "
    "successfully.\nReply with exactly one line: 'Status: SUCCESS' if the "
    "task was completed, or 'Status: FAILURE' otherwise.\n";

inline constexpr std::string_view kJudgeAffirmativeToken = "Status: SUCCESS";

inline constexpr std::string_view kVerbalizeInstruction =
    "Rewrite each action line below as one short natural-language sentence "
    "describing the action. Output exactly one sentence per line, in the same "
    "order, with no extra lines.\n";

}  // namespace awm
