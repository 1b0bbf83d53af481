task_plan[0] = (0, 'approach', ('half-eaten apple', 0.3, 0.04, 'side'))
