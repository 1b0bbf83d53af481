task_plan = [
    # Approach the whole apple from the side at moderate speed for better accuracy
    (0, 'approach', ('whole apple', 0.7, 0.02, 'side')),
    # Pick the apple from the side with low speed for control and precision
    (1, 'pick', ('whole apple', 0.3, 0.02, 'side')),
    # Approach the red trash can quickly as precision is less of a concern
    (2, 'approach', ('large red trash can', 0.7, 0.02, 'side')),
    # Drop the apple into the trash can without worrying about orientation
    (3, 'drop', ('large red trash can', 0.7, 0.02))
]
