"""
Building prompts and reading tagged answers
===========================================

The system prompt sets the context once; each user prompt lists the
observation, every valid action and the answer rules. Model replies are
matched against the closed action set.
"""

from meshpilot import (
    PromptVariant,
    build_system_prompt,
    build_user_prompt,
    enumerate_valid_actions,
    parse_tagged_response,
)

valid = enumerate_valid_actions(3)
print(build_system_prompt(3, 36))
print()

observation = "Network Status from Node1 Best Neighbors List is [2, 3]."
prompt = build_user_prompt(observation, valid, PromptVariant.ONE_NEWLINE)
print(prompt)

# %%
# The three prompt endings only differ in their final bytes.
for variant in PromptVariant:
    print(f"{variant.label:<28} ends with {build_user_prompt(observation, valid, variant)[-3:]!r}")

# %%
# A handful of replies and how each one is read.
replies = [
    "<ACTION>Update Neighbors of node 1</ACTION>",
    "Sure! <action>update   neighbors of NODE 1</action>",
    "I think node 1 needs new neighbors.",
    "<ACTION>Reroute through node 2</ACTION>",
    "<ACTION>No Action</ACTION> <ACTION>Update Neighbors of node 1</ACTION>",
]
for reply in replies:
    out = parse_tagged_response(reply, valid)
    print(f"{out.status.value:<14} {str(out.action):<30} <- {reply!r}")
