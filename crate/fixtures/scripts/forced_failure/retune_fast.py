task_plan[0] = (0, 'approach', ('half-eaten apple', 0.7, 0.02, 'side'))
