task_plan = [
    # Approach the whole apple with moderate speed and precision.
    (0, 'approach', ('whole apple', 0.5, 0.02, 'top')),
    # Moderate speed for precise movement. The clearance is set just tight enough for
    # a good approach, picking from the top to avoid damaging the fruit.
    # Pick up the whole apple once in reach.
    (1, 'pick', ('whole apple', 0.5, 0.02, 'top')),
    # Same speed as approach for consistency; we use top grasp to gently pick up the apple
    # without squeezing it.
    # Move to the white table's location to place the apple down.
    (2, 'place', ('white table', 0.5, 0.5, 0.02)),
    # This orientation ensures the apple is placed on the table without rolling,
    #with moderate speed for efficiency and care.
]
