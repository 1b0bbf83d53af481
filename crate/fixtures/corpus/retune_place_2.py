# Update the task_plan with new arguments for the failed action 2
task_plan[2] = (2, 'place', ('large red trash can', 0.1, 0.3, 0.07))
