task_plan = [
    (0, "pick", ("crumpled paper ball 1", 0.5, 0.01, "top")),
    # Pick up the first crumpled paper ball from the top with moderate speed and 
    # obstacle clearance.
    (1, "drop", ("large red trash can", 0.5, 0.01)),
    # Drop the crumpled paper ball into the trash can with moderate speed and 
    # obstacle clearance.
    (2, "pick", ("crumpled paper ball 2", 0.5, 0.01, "top")),
    # Pick up the second crumpled paper ball from the top with moderate speed and 
    # obstacle clearance.
    (3, "drop", ("large red trash can", 0.5, 0.01)),
    # Drop the second crumpled paper ball into the trash can with moderate speed 
    # and obstacle clearance.
    (4, "pick", ("whole apple", 0.5, 0.01, "top")),
    # Pick up the whole apple from the top with moderate speed and obstacle clearance.
    (5, "place", ("storage shelf", 0.5, 0.01, 0.5)),
    # Place the whole apple on the storage shelf with moderate speed, obstacle clearance, 
    # and maintaining original orientation.
    (6, "pick", ("half-eaten apple", 0.5, 0.01, "top")),
    # Pick up the half-eaten apple from the top with moderate speed and obstacle clearance.
    (7, "place", ("storage shelf", 0.5, 0.01, 0.5)),
    # Place the half-eaten apple on the storage shelf with moderate speed, obstacle clearance, 
    # and maintaining original orientation.
    (8, "pick", ("empty glass 1", 0.5, 0.01, "side")),
    # Pick up the empty glass from the side with moderate speed and obstacle clearance.
    (9, "place", ("storage shelf", 0.5, 0.01, 0.5)),
    # Place the empty glass on the storage shelf with moderate speed, obstacle clearance,
    # and maintaining original orientation.
    (10, "pick", ("glass with yellowish liquid", 0.5, 0.01, "side")),
    # Pick up the glass with yellowish liquid from the side with moderate speed and 
    # obstacle clearance.
    (11, "place", ("storage shelf", 0.5, 0.01, 0.5)),
    # Place the glass with yellowish liquid on the storage shelf with moderate speed, 
    # obstacle clearance, and maintaining original orientation.
]
