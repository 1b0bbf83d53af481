# Update the task_plan with new arguments for the failed action 3
task_plan[3] = (3, 'approach', ('half-eaten apple', 0.4, 0.05, 'top'))
