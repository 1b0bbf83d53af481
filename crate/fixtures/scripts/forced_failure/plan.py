task_plan = [
    (0, 'approach', ('half-eaten apple', 0.5, 0.03, 'side')),
    (1, 'pick', ('half-eaten apple', 0.5, 0.03, 'side')),
]
