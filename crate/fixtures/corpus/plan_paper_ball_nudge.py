task_plan = [
    # The robot approaches the crumpled paper ball at a speed that has successfully worked 
    # before.
    (0, 'approach', ('crumpled paper ball 2', 0.5, 0.01, 'top')),
    # Instead of picking it up, the robot now attempts to nudge the paper ball into the
    # trash can.
    (1, 'drop', ('large red trash can', 0.5, 0.01)),
]
